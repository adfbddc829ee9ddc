//! Projects 3D element descriptors into rendered views as 2D boxes and
//! annotates the images with collision-free ID labels.
//!
//! Label placement walks a fixed anchor candidate list per element
//! (top-left, top-right, left, right) and takes the first spot that stays
//! inside the image and intersects nothing placed so far; when every anchor
//! fails, the top-right position is used regardless of overlap. Elements are
//! processed in ascending id order and each element's own box joins the
//! occupied set before its label is placed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::camera::{project_point, CameraPose, Intrinsics};
use crate::descriptors::Descriptor;
use crate::error::Result;
use crate::font;
use crate::render::{Image, RenderedView};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Minimum clipped box area (px^2) for an element to count as visible.
pub const MIN_BOX_AREA: i64 = 4;

/// Dark palette for box outlines and label text, cycled by element id.
const PALETTE: [[u8; 3]; 6] = [
    [170, 0, 0],
    [0, 0, 170],
    [0, 120, 0],
    [140, 0, 140],
    [160, 80, 0],
    [0, 110, 110],
];

/// Label background; light so the dark text stays readable.
const LABEL_BACKGROUND: [u8; 3] = [255, 252, 204];

/// Axis-aligned pixel rectangle, inclusive on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Box2D {
    pub x_min: i32,
    pub y_min: i32,
    pub x_max: i32,
    pub y_max: i32,
}

impl Box2D {
    pub fn new(x_min: i32, y_min: i32, x_max: i32, y_max: i32) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> i64 {
        (self.x_max - self.x_min) as i64
    }

    pub fn height(&self) -> i64 {
        (self.y_max - self.y_min) as i64
    }

    /// Pixel-span area `(x_max - x_min) * (y_max - y_min)`.
    pub fn span_area(&self) -> i64 {
        self.width() * self.height()
    }

    pub fn intersects(&self, other: &Box2D) -> bool {
        self.x_min <= other.x_max
            && other.x_min <= self.x_max
            && self.y_min <= other.y_max
            && other.y_min <= self.y_max
    }

    pub fn inside(&self, width: u32, height: u32) -> bool {
        self.x_min >= 0
            && self.y_min >= 0
            && self.x_max < width as i32
            && self.y_max < height as i32
    }
}

/// Anchor slot a label ended up in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    TopLeft,
    TopRight,
    Left,
    Right,
    Fallback,
}

/// Where one element's id label was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPlacement {
    pub element_id: u32,
    pub rect: Box2D,
    pub anchor_used: Anchor,
}

/// A rendered view plus the projected element boxes and placed labels,
/// and the image with both drawn in.
#[derive(Debug, Clone)]
pub struct AnnotatedView<T> {
    pub base: RenderedView<T>,
    pub boxes: BTreeMap<u32, Box2D>,
    pub labels: Vec<LabelPlacement>,
    pub image: Image,
}

/// Serializable annotation metadata for one view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewAnnotations {
    pub view_index: u32,
    pub boxes: Vec<BoxRecord>,
    pub labels: Vec<LabelRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub id: u32,
    pub x_min: i32,
    pub y_min: i32,
    pub x_max: i32,
    pub y_max: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: u32,
    pub rect: Box2D,
    pub anchor: Anchor,
}

impl<T> AnnotatedView<T> {
    pub fn annotations(&self) -> ViewAnnotations {
        ViewAnnotations {
            view_index: self.base.view_index,
            boxes: self
                .boxes
                .iter()
                .map(|(&id, b)| BoxRecord {
                    id,
                    x_min: b.x_min,
                    y_min: b.y_min,
                    x_max: b.x_max,
                    y_max: b.y_max,
                })
                .collect(),
            labels: self
                .labels
                .iter()
                .map(|l| LabelRecord {
                    id: l.element_id,
                    rect: l.rect,
                    anchor: l.anchor_used,
                })
                .collect(),
        }
    }
}

/// Projects the eight corners of a descriptor's bounding box
/// (centroid +- extents/2) and returns the clipped pixel box, or `None` when
/// the element is not visible: centroid behind the camera, every corner
/// behind the camera, no overlap with the image, or clipped span area below
/// [`MIN_BOX_AREA`].
pub fn project_element_box<T: Scalar>(
    d: &Descriptor<T>,
    pose: &CameraPose<T>,
    intr: &Intrinsics<T>,
) -> Option<Box2D> {
    project_point(intr, pose, d.centroid)?;

    let half = d.extents / T::from_f64_lossy(2.0);
    let mut min_u = f64::INFINITY;
    let mut max_u = f64::NEG_INFINITY;
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    let mut any = false;
    for sx in [-T::one(), T::one()] {
        for sy in [-T::one(), T::one()] {
            for sz in [-T::one(), T::one()] {
                let corner =
                    d.centroid + Vec3::new(half.x * sx, half.y * sy, half.z * sz);
                // Corners behind the camera plane have no meaningful
                // projection and are skipped.
                let Some(proj) = project_point(intr, pose, corner) else {
                    continue;
                };
                any = true;
                min_u = min_u.min(proj.u.to_f64_lossy());
                max_u = max_u.max(proj.u.to_f64_lossy());
                min_v = min_v.min(proj.v.to_f64_lossy());
                max_v = max_v.max(proj.v.to_f64_lossy());
            }
        }
    }
    if !any {
        return None;
    }

    clip_float_box(min_u, min_v, max_u, max_v, intr.width, intr.height)
}

/// Floors/ceils a continuous box to pixels, clips it to the image, and
/// applies the minimum-area rule.
fn clip_float_box(
    min_u: f64,
    min_v: f64,
    max_u: f64,
    max_v: f64,
    width: u32,
    height: u32,
) -> Option<Box2D> {
    let x_min = (min_u.floor() as i64).max(0);
    let y_min = (min_v.floor() as i64).max(0);
    let x_max = (max_u.ceil() as i64).min(width as i64 - 1);
    let y_max = (max_v.ceil() as i64).min(height as i64 - 1);
    if x_min > x_max || y_min > y_max {
        return None;
    }
    let b = Box2D::new(x_min as i32, y_min as i32, x_max as i32, y_max as i32);
    if b.span_area() < MIN_BOX_AREA {
        return None;
    }
    Some(b)
}

fn anchor_rect(anchor: Anchor, b: &Box2D, w: i32, h: i32) -> Box2D {
    match anchor {
        // Label's bottom-right corner sits at the box's top-left corner.
        Anchor::TopLeft => Box2D::new(b.x_min - w, b.y_min - h, b.x_min - 1, b.y_min - 1),
        // Mirrored: bottom-left corner at the box's top-right corner.
        Anchor::TopRight | Anchor::Fallback => {
            Box2D::new(b.x_max + 1, b.y_min - h, b.x_max + w, b.y_min - 1)
        }
        // Vertically centered, right edge at the box's left edge.
        Anchor::Left => {
            let dy = ((b.y_max - b.y_min + 1) - h) / 2;
            Box2D::new(b.x_min - w, b.y_min + dy, b.x_min - 1, b.y_min + dy + h - 1)
        }
        Anchor::Right => {
            let dy = ((b.y_max - b.y_min + 1) - h) / 2;
            Box2D::new(b.x_max + 1, b.y_min + dy, b.x_max + w, b.y_min + dy + h - 1)
        }
    }
}

const ANCHOR_ORDER: [Anchor; 4] = [Anchor::TopLeft, Anchor::TopRight, Anchor::Left, Anchor::Right];

/// Places one label per box, ascending id order. See the module docs for the
/// exact procedure. `label_sizes` gives each label's (width, height) in
/// pixels; ids missing from it are skipped.
pub fn place_labels(
    boxes: &BTreeMap<u32, Box2D>,
    label_sizes: &BTreeMap<u32, (u32, u32)>,
    image_size: (u32, u32),
) -> Vec<LabelPlacement> {
    let (img_w, img_h) = image_size;
    let mut occupied: Vec<Box2D> = Vec::new();
    let mut placements = Vec::new();

    for (&id, b) in boxes {
        occupied.push(*b);
        let Some(&(lw, lh)) = label_sizes.get(&id) else {
            continue;
        };
        let (lw, lh) = (lw as i32, lh as i32);

        let chosen = ANCHOR_ORDER
            .iter()
            .map(|&a| (a, anchor_rect(a, b, lw, lh)))
            .find(|(_, rect)| {
                rect.inside(img_w, img_h) && !occupied.iter().any(|o| rect.intersects(o))
            });
        let (anchor_used, rect) = match chosen {
            Some((a, rect)) => (a, rect),
            None => (Anchor::Fallback, anchor_rect(Anchor::Fallback, b, lw, lh)),
        };
        occupied.push(rect);
        placements.push(LabelPlacement {
            element_id: id,
            rect,
            anchor_used,
        });
    }
    placements
}

/// Projects every descriptor into the view, places labels, and draws both
/// onto a copy of the base image. Labels read `id:affordance_type`.
pub fn annotate_view<T: Scalar>(
    view: &RenderedView<T>,
    descriptors: &[Descriptor<T>],
) -> Result<AnnotatedView<T>> {
    let mut boxes = BTreeMap::new();
    let mut label_sizes = BTreeMap::new();
    let mut texts: BTreeMap<u32, String> = BTreeMap::new();
    for d in descriptors {
        if let Some(b) = project_element_box(d, &view.pose, &view.intrinsics) {
            boxes.insert(d.id, b);
            let text = format!("{}:{}", d.id, d.affordance_type);
            label_sizes.insert(d.id, font::label_size(&text));
            texts.insert(d.id, text);
        }
    }

    let labels = place_labels(
        &boxes,
        &label_sizes,
        (view.image.width(), view.image.height()),
    );

    let mut image = view.image.clone();
    for (&id, b) in &boxes {
        font::draw_rect_outline(
            &mut image,
            b.x_min as i64,
            b.y_min as i64,
            b.x_max as i64,
            b.y_max as i64,
            2,
            color_for(id),
        );
    }
    for label in &labels {
        let r = label.rect;
        font::fill_rect(
            &mut image,
            r.x_min as i64,
            r.y_min as i64,
            r.x_max as i64,
            r.y_max as i64,
            LABEL_BACKGROUND,
        );
        font::draw_text(
            &mut image,
            r.x_min as i64 + font::PADDING as i64,
            r.y_min as i64 + font::PADDING as i64,
            &texts[&label.element_id],
            color_for(label.element_id),
        );
    }

    Ok(AnnotatedView {
        base: view.clone(),
        boxes,
        labels,
        image,
    })
}

fn color_for(id: u32) -> [u8; 3] {
    PALETTE[(id as usize + PALETTE.len() - 1) % PALETTE.len()]
}

//! Z-buffered point-splat renderer producing surround-view RGB images.
//!
//! Each cloud point paints a filled square of side `2*splat_radius + 1`
//! centered at its rounded projection; a per-pixel depth buffer keeps the
//! nearest point. The whole splat shares the depth of its center, which keeps
//! the rasterizer deterministic and is accurate enough at room scale.

use std::io::Cursor;
use std::path::Path;

use crate::camera::{project_point, CameraPose, Intrinsics};
use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Background color for pixels no splat touches. White keeps the dark
/// annotation ink legible.
pub const BACKGROUND: [u8; 3] = [255, 255, 255];

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: u32, height: u32, fill: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![fill; (width as usize) * (height as usize)],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, color: [u8; 3]) {
        self.pixels[y as usize * self.width as usize + x as usize] = color;
    }

    /// Nearest-neighbor upscale of the centered `width/2 x height/2` region
    /// back to full size.
    pub fn center_crop_zoom2(&self) -> Image {
        let cw = (self.width / 2).max(1);
        let ch = (self.height / 2).max(1);
        let x0 = (self.width - cw) / 2;
        let y0 = (self.height - ch) / 2;
        let mut out = Image::new(self.width, self.height, BACKGROUND);
        for y in 0..self.height {
            for x in 0..self.width {
                let sx = (x0 + x * cw / self.width).min(self.width - 1);
                let sy = (y0 + y * ch / self.height).min(self.height - 1);
                out.set(x, y, self.get(sx, sy));
            }
        }
        out
    }

    /// Encodes the image as PNG bytes.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        let flat: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let img = image::RgbImage::from_raw(self.width, self.height, flat)
            .expect("buffer length matches dimensions");
        img.write_to(&mut Cursor::new(&mut buf), image::ImageFormat::Png)?;
        Ok(buf)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(e, path.display().to_string()))
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Image> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
        let (width, height) = img.dimensions();
        let pixels = img.pixels().map(|p| p.0).collect();
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(e, path.display().to_string()))?;
        Self::decode_png(&bytes)
    }
}

/// A rendered image together with the camera that produced it.
#[derive(Debug, Clone)]
pub struct RenderedView<T> {
    pub image: Image,
    pub pose: CameraPose<T>,
    pub intrinsics: Intrinsics<T>,
    /// 1-based index within the sweep.
    pub view_index: u32,
}

/// Renders the cloud from one pose. Points whose rounded projection center
/// falls outside the image are dropped; splats of in-image centers are
/// clipped at the borders.
pub fn render_view<T: Scalar>(
    cloud: &PointCloud<T>,
    pose: &CameraPose<T>,
    intr: &Intrinsics<T>,
    splat_radius: u32,
) -> Image {
    let mut image = Image::new(intr.width, intr.height, BACKGROUND);
    let mut depth = vec![T::infinity(); (intr.width as usize) * (intr.height as usize)];
    let (w, h) = (intr.width as i64, intr.height as i64);
    let r = splat_radius as i64;

    for (i, &p) in cloud.positions().iter().enumerate() {
        let Some(proj) = project_point(intr, pose, p) else {
            continue;
        };
        let cu = proj.u.round().to_f64_lossy() as i64;
        let cv = proj.v.round().to_f64_lossy() as i64;
        if cu < 0 || cu >= w || cv < 0 || cv >= h {
            continue;
        }
        let color = cloud.color(i);
        for y in (cv - r).max(0)..=(cv + r).min(h - 1) {
            for x in (cu - r).max(0)..=(cu + r).min(w - 1) {
                let idx = y as usize * intr.width as usize + x as usize;
                if proj.depth < depth[idx] {
                    depth[idx] = proj.depth;
                    image.pixels[idx] = color;
                }
            }
        }
    }
    image
}

/// Renders the full surround sweep: `n` poses at `center` via
/// [`crate::camera::sweep_poses`], one image each, `view_index` matching the
/// 1-based pose index.
pub fn render_sweep<T: Scalar>(
    cloud: &PointCloud<T>,
    center: Vec3<T>,
    n: u32,
    intr: &Intrinsics<T>,
    splat_radius: u32,
) -> Result<Vec<RenderedView<T>>> {
    let poses = crate::camera::sweep_poses(center, n)?;
    Ok(poses
        .into_iter()
        .enumerate()
        .map(|(i, pose)| RenderedView {
            image: render_view(cloud, &pose, intr, splat_radius),
            pose,
            intrinsics: *intr,
            view_index: (i + 1) as u32,
        })
        .collect())
}

//! Segmentation-proposal ingestion and the per-element geometry/semantics
//! descriptors handed to the reasoning stage.
//!
//! Proposals come from files so any segmenter emitting the JSON schema plugs
//! in; nothing here runs a network.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointcloud::{PointCloud, PointMask};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// The closed set of affordance types an element can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffordanceType {
    Rotate,
    KeyPress,
    TipPush,
    HookPull,
    PinchPull,
    HookTurn,
    FootPush,
    PlugIn,
    Unplug,
}

impl AffordanceType {
    /// All nine members, in their canonical order.
    pub const ALL: [AffordanceType; 9] = [
        AffordanceType::Rotate,
        AffordanceType::KeyPress,
        AffordanceType::TipPush,
        AffordanceType::HookPull,
        AffordanceType::PinchPull,
        AffordanceType::HookTurn,
        AffordanceType::FootPush,
        AffordanceType::PlugIn,
        AffordanceType::Unplug,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AffordanceType::Rotate => "rotate",
            AffordanceType::KeyPress => "key_press",
            AffordanceType::TipPush => "tip_push",
            AffordanceType::HookPull => "hook_pull",
            AffordanceType::PinchPull => "pinch_pull",
            AffordanceType::HookTurn => "hook_turn",
            AffordanceType::FootPush => "foot_push",
            AffordanceType::PlugIn => "plug_in",
            AffordanceType::Unplug => "unplug",
        }
    }
}

impl fmt::Display for AffordanceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AffordanceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Vocabulary(format!("unknown affordance type {s:?}")))
    }
}

/// One segmented affordance element as emitted by the upstream segmenter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementProposal {
    pub mask: PointMask,
    pub affordance_type: AffordanceType,
    pub confidence: f64,
}

impl ElementProposal {
    pub fn new(mask: PointMask, affordance_type: AffordanceType, confidence: f64) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::EmptyInput("proposal mask is empty".into()));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Range(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Self {
            mask,
            affordance_type,
            confidence,
        })
    }
}

/// Raw JSON shape of a proposal; validation happens in [`ElementProposal::new`].
#[derive(Deserialize)]
struct ProposalRecord {
    mask: Vec<usize>,
    affordance_type: String,
    #[serde(default = "default_confidence")]
    confidence: f64,
}

fn default_confidence() -> f64 {
    1.0
}

/// Loads proposals from a JSON array of
/// `{"mask": [int...], "affordance_type": string, "confidence": number}`.
///
/// `confidence` defaults to 1.0 when absent. An empty array is a valid scene
/// with no detected elements.
pub fn load_proposals(path: impl AsRef<Path>) -> Result<Vec<ElementProposal>> {
    let path = path.as_ref();
    let data = fs::read_to_string(path).map_err(|e| Error::io(e, path.display().to_string()))?;
    parse_proposals(&data)
}

/// Same as [`load_proposals`] over an in-memory JSON string.
pub fn parse_proposals(json: &str) -> Result<Vec<ElementProposal>> {
    let records: Vec<ProposalRecord> = serde_json::from_str(json)?;
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let affordance_type =
                r.affordance_type
                    .parse::<AffordanceType>()
                    .map_err(|e| match e {
                        Error::Vocabulary(msg) => Error::Vocabulary(format!("proposal {i}: {msg}")),
                        other => other,
                    })?;
            ElementProposal::new(PointMask::new(r.mask), affordance_type, r.confidence)
                .map_err(|e| match e {
                    Error::Range(msg) => Error::Range(format!("proposal {i}: {msg}")),
                    other => other,
                })
        })
        .collect()
}

/// Compact per-element summary: centroid, axis-aligned extents, affordance
/// type, and the segmenter's confidence. Ids are the 1-based positions of the
/// proposals they were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor<T> {
    pub id: u32,
    pub centroid: Vec3<T>,
    /// Full axis-aligned sizes (max - min per axis), not half-extents.
    pub extents: Vec3<T>,
    pub affordance_type: AffordanceType,
    pub confidence: f64,
}

/// Builds one descriptor per proposal: centroid is the mean of the masked
/// positions, extents are the componentwise max-min.
pub fn build_descriptors<T: Scalar>(
    cloud: &PointCloud<T>,
    proposals: &[ElementProposal],
) -> Result<Vec<Descriptor<T>>> {
    proposals
        .iter()
        .enumerate()
        .map(|(i, prop)| {
            prop.mask.validate_for(cloud.len()).map_err(|e| {
                Error::IndexOutOfRange(format!("proposal {i}: {e}"))
            })?;
            let mut sum = Vec3::<T>::zero();
            let mut min = Vec3::splat(T::infinity());
            let mut max = Vec3::splat(T::neg_infinity());
            for idx in prop.mask.iter() {
                let p = cloud.position(idx);
                sum += p;
                min = min.min(p);
                max = max.max(p);
            }
            let n = T::from_f64_lossy(prop.mask.len() as f64);
            Ok(Descriptor {
                id: (i + 1) as u32,
                centroid: sum / n,
                extents: max - min,
                affordance_type: prop.affordance_type,
                confidence: prop.confidence,
            })
        })
        .collect()
}

/// Trivial fallback segmenter for synthetic scenes: clusters points into
/// connected components over a voxel grid (26-neighborhood) and labels every
/// component with the supplied affordance type. Not meant for real scans.
pub fn segment_connected_components<T: Scalar>(
    cloud: &PointCloud<T>,
    voxel_size: T,
    label: AffordanceType,
) -> Result<Vec<ElementProposal>> {
    if voxel_size <= T::zero() {
        return Err(Error::Parameter("voxel size must be positive".into()));
    }
    let cell_of = |p: Vec3<T>| -> (i64, i64, i64) {
        (
            (p.x / voxel_size).floor().to_f64_lossy() as i64,
            (p.y / voxel_size).floor().to_f64_lossy() as i64,
            (p.z / voxel_size).floor().to_f64_lossy() as i64,
        )
    };

    let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in cloud.positions().iter().enumerate() {
        cells.entry(cell_of(p)).or_default().push(i);
    }

    let mut visited: HashMap<(i64, i64, i64), bool> = HashMap::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<_> = cells.keys().copied().collect();
    keys.sort_unstable();

    for key in keys {
        if visited.get(&key).copied().unwrap_or(false) {
            continue;
        }
        let mut stack = vec![key];
        visited.insert(key, true);
        let mut member_points = Vec::new();
        while let Some(cell) = stack.pop() {
            member_points.extend_from_slice(&cells[&cell]);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let next = (cell.0 + dx, cell.1 + dy, cell.2 + dz);
                        if cells.contains_key(&next) && !visited.get(&next).copied().unwrap_or(false)
                        {
                            visited.insert(next, true);
                            stack.push(next);
                        }
                    }
                }
            }
        }
        components.push(member_points);
    }

    components
        .into_iter()
        .map(|pts| ElementProposal::new(PointMask::new(pts), label, 1.0))
        .collect()
}

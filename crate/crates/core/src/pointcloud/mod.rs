//! Point-cloud data model, PLY ingestion, spatial queries, and the
//! curriculum mask-dilation utility used when training the upstream
//! element segmenter.
//!
//! Scene convention: meters, up axis +z.

mod dilate;
mod ply;

pub use dilate::dilate_mask;
pub use ply::{load_ply, save_ply, PlyEncoding};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Default color assigned to vertices when the source PLY has no color channel.
pub const DEFAULT_COLOR: [u8; 3] = [128, 128, 128];

/// Positions (and per-point RGB colors) of a scanned indoor scene.
///
/// Colors always have the same length as positions; clouds loaded from
/// color-less files get [`DEFAULT_COLOR`] everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    positions: Vec<Vec3<T>>,
    colors: Vec<[u8; 3]>,
}

impl<T: Scalar> PointCloud<T> {
    /// Builds a cloud, validating that every coordinate is finite and that
    /// `colors`, when given, matches `positions` in length.
    pub fn new(positions: Vec<Vec3<T>>, colors: Option<Vec<[u8; 3]>>) -> Result<Self> {
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite coordinate at vertex {i}"
            )));
        }
        let colors = match colors {
            Some(c) => {
                if c.len() != positions.len() {
                    return Err(Error::Parameter(format!(
                        "colors length {} != positions length {}",
                        c.len(),
                        positions.len()
                    )));
                }
                c
            }
            None => vec![DEFAULT_COLOR; positions.len()],
        };
        Ok(Self { positions, colors })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn colors(&self) -> &[[u8; 3]] {
        &self.colors
    }

    pub fn position(&self, i: usize) -> Vec3<T> {
        self.positions[i]
    }

    pub fn color(&self, i: usize) -> [u8; 3] {
        self.colors[i]
    }

    /// Tight axis-aligned bounds over all positions.
    ///
    /// Errors on an empty cloud.
    pub fn bounds(&self) -> Result<Aabb<T>> {
        let first = *self
            .positions
            .first()
            .ok_or_else(|| Error::EmptyInput("bounds of an empty cloud".into()))?;
        let mut min = first;
        let mut max = first;
        for &p in &self.positions[1..] {
            min = min.min(p);
            max = max.max(p);
        }
        Ok(Aabb { min, max })
    }
}

/// Tight componentwise min/max over all positions; see [`PointCloud::bounds`].
pub fn bounds<T: Scalar>(cloud: &PointCloud<T>) -> Result<Aabb<T>> {
    cloud.bounds()
}

/// A sorted set of point indices into a [`PointCloud`].
///
/// Construction sorts and deduplicates, so indices are always strictly
/// increasing. Serialized as a plain JSON array of integers.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct PointMask {
    indices: Vec<usize>,
}

impl PointMask {
    /// Builds a mask from arbitrary indices; sorts and deduplicates.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Checks every index is addressable in a cloud of `cloud_len` points.
    pub fn validate_for(&self, cloud_len: usize) -> Result<()> {
        match self.indices.last() {
            Some(&max) if max >= cloud_len => Err(Error::IndexOutOfRange(format!(
                "mask index {max} >= cloud size {cloud_len}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

impl<'de> Deserialize<'de> for PointMask {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        Ok(PointMask::new(indices))
    }
}

impl FromIterator<usize> for PointMask {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PointMask::new(iter.into_iter().collect())
    }
}

/// Axis-aligned bounding box with `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Result<Self> {
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(Error::Parameter(format!(
                "Aabb min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) / T::from_f64_lossy(2.0)
    }

    pub fn diagonal(&self) -> T {
        (self.max - self.min).norm()
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }
}

/// Dilation radius of the coarse-to-fine curriculum schedule:
/// `delta0 * beta^floor(t / tau)`.
///
/// `t` counts training iterations; the radius shrinks by a factor of `beta`
/// every `tau` iterations.
pub fn dilation_radius<T: Scalar>(t: u64, delta0: T, beta: T, tau: u64) -> Result<T> {
    if delta0 <= T::zero() {
        return Err(Error::Parameter(format!(
            "initial dilation radius must be positive, got {delta0}"
        )));
    }
    if beta <= T::zero() || beta > T::one() {
        return Err(Error::Parameter(format!(
            "decay factor must be in (0, 1], got {beta}"
        )));
    }
    if tau == 0 {
        return Err(Error::Parameter("update interval must be >= 1".into()));
    }
    let steps = (t / tau) as i32;
    Ok(delta0 * beta.powi(steps))
}

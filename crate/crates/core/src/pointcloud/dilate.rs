//! Mask dilation with a uniform voxel grid.

use std::collections::HashMap;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::vec3::Vec3;

use super::{PointCloud, PointMask};

/// Expands `mask` to every cloud point whose distance to the nearest masked
/// point is strictly below `radius`.
///
/// `radius == 0` is special-cased to return the input mask unchanged (a
/// literal strict-inequality reading would yield the empty set, which is not
/// what a no-dilation limit means). For `radius > 0` the result is always a
/// superset of the input since masked points sit at distance zero.
///
/// Uses a voxel grid with cell size equal to `radius`, so only the 27
/// neighboring cells need scanning per query point; falls back to a full scan
/// when the radius is so large (over a quarter of the scene diagonal) that
/// the grid would not prune anything.
pub fn dilate_mask<T: Scalar>(
    cloud: &PointCloud<T>,
    mask: &PointMask,
    radius: T,
) -> Result<PointMask> {
    mask.validate_for(cloud.len())?;
    if radius < T::zero() {
        return Err(crate::error::Error::Parameter(format!(
            "dilation radius must be >= 0, got {radius}"
        )));
    }
    if radius == T::zero() || mask.is_empty() {
        return Ok(mask.clone());
    }

    let diagonal = cloud.bounds()?.diagonal();
    let use_grid = radius <= diagonal / T::from_f64_lossy(4.0);

    let masked: Vec<Vec3<T>> = mask.iter().map(|i| cloud.position(i)).collect();
    let result = if use_grid {
        dilate_with_grid(cloud, &masked, radius)
    } else {
        dilate_full_scan(cloud, &masked, radius)
    };
    Ok(PointMask::new(result))
}

fn dilate_full_scan<T: Scalar>(cloud: &PointCloud<T>, masked: &[Vec3<T>], radius: T) -> Vec<usize> {
    let r2 = radius * radius;
    cloud
        .positions()
        .iter()
        .enumerate()
        .filter(|(_, &p)| masked.iter().any(|&m| (p - m).norm_squared() < r2))
        .map(|(i, _)| i)
        .collect()
}

fn dilate_with_grid<T: Scalar>(cloud: &PointCloud<T>, masked: &[Vec3<T>], radius: T) -> Vec<usize> {
    let cell_of = |p: Vec3<T>| -> (i64, i64, i64) {
        (
            (p.x / radius).floor().to_f64_lossy() as i64,
            (p.y / radius).floor().to_f64_lossy() as i64,
            (p.z / radius).floor().to_f64_lossy() as i64,
        )
    };

    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (j, &m) in masked.iter().enumerate() {
        grid.entry(cell_of(m)).or_default().push(j);
    }

    let r2 = radius * radius;
    let mut out = Vec::new();
    for (i, &p) in cloud.positions().iter().enumerate() {
        let (cx, cy, cz) = cell_of(p);
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(cands) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &j in cands {
                            if (p - masked[j]).norm_squared() < r2 {
                                out.push(i);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

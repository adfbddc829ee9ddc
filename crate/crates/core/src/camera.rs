//! Virtual pinhole camera, surround-sweep pose generation, and the
//! observation-center procedure for placing that sweep.
//!
//! Conventions: yaw 0 faces +x and grows counterclockwise seen from above;
//! pitch is fixed at 0 (pure horizontal scan); image v axis points down.

use serde::{Deserialize, Serialize};

use crate::descriptors::Descriptor;
use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Points closer than this along the forward axis count as behind the camera.
pub const BEHIND_CAMERA_EPSILON: f64 = 1e-6;

/// Pinhole intrinsics in pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics<T> {
    pub width: u32,
    pub height: u32,
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Scalar> Intrinsics<T> {
    pub fn new(width: u32, height: u32, fx: T, fy: T, cx: T, cy: T) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter("image dimensions must be positive".into()));
        }
        if fx <= T::zero() || fy <= T::zero() {
            return Err(Error::Parameter("focal lengths must be positive".into()));
        }
        let (w, h) = (
            T::from_f64_lossy(width as f64),
            T::from_f64_lossy(height as f64),
        );
        if cx < T::zero() || cx >= w || cy < T::zero() || cy >= h {
            return Err(Error::Parameter(
                "principal point must lie inside the image".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            fx,
            fy,
            cx,
            cy,
        })
    }
}

/// Derives intrinsics from a horizontal field of view: the principal point is
/// the image center and `fx = fy = (width/2) / tan(fov/2)`.
pub fn intrinsics_from_fov<T: Scalar>(fov_deg: T, width: u32, height: u32) -> Result<Intrinsics<T>> {
    let lo = T::zero();
    let hi = T::from_f64_lossy(180.0);
    if fov_deg <= lo || fov_deg >= hi {
        return Err(Error::Parameter(format!(
            "field of view must be in (0, 180) degrees, got {fov_deg}"
        )));
    }
    let two = T::from_f64_lossy(2.0);
    let half_angle = fov_deg.to_radians() / two;
    let f = T::from_f64_lossy(width as f64) / two / half_angle.tan();
    Intrinsics::new(
        width,
        height,
        f,
        f,
        T::from_f64_lossy(width as f64) / two,
        T::from_f64_lossy(height as f64) / two,
    )
}

/// Camera position plus yaw about +z. Pitch and roll are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose<T> {
    pub position: Vec3<T>,
    pub yaw: T,
}

impl<T: Scalar> CameraPose<T> {
    /// Builds a pose, normalizing yaw into `[0, 2*pi)`.
    pub fn new(position: Vec3<T>, yaw: T) -> Result<Self> {
        if !position.is_finite() || !yaw.is_finite() {
            return Err(Error::Parameter("camera pose must be finite".into()));
        }
        let tau = T::PI() + T::PI();
        let mut yaw = yaw % tau;
        if yaw < T::zero() {
            yaw += tau;
        }
        Ok(Self { position, yaw })
    }

    /// Unit vector the camera looks along (horizontal plane).
    pub fn forward(&self) -> Vec3<T> {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), T::zero())
    }

    /// Unit up vector (always +z for a horizontal scan).
    pub fn up(&self) -> Vec3<T> {
        Vec3::new(T::zero(), T::zero(), T::one())
    }

    /// Unit right vector, `forward x up`.
    pub fn right(&self) -> Vec3<T> {
        self.forward().cross(self.up())
    }
}

/// A point expressed in image coordinates with its forward depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint<T> {
    pub u: T,
    pub v: T,
    pub depth: T,
}

/// Center of the surround sweep: horizontal position is the mean of the
/// element centroids, height is the midpoint of the cloud's z extent
/// (elements are often low; eye height should not be).
pub fn observation_center<T: Scalar>(
    cloud: &PointCloud<T>,
    descriptors: &[Descriptor<T>],
) -> Result<Vec3<T>> {
    if descriptors.is_empty() {
        return Err(Error::EmptyInput(
            "observation center needs at least one descriptor".into(),
        ));
    }
    let bounds = cloud.bounds()?;
    let n = T::from_f64_lossy(descriptors.len() as f64);
    let mut x = T::zero();
    let mut y = T::zero();
    for d in descriptors {
        x += d.centroid.x;
        y += d.centroid.y;
    }
    let z = (bounds.min.z + bounds.max.z) / T::from_f64_lossy(2.0);
    Ok(Vec3::new(x / n, y / n, z))
}

/// `n` poses at `center`, yaw of the i-th (1-based) pose being
/// `(i-1) * 2*pi / n`.
pub fn sweep_poses<T: Scalar>(center: Vec3<T>, n: u32) -> Result<Vec<CameraPose<T>>> {
    if n == 0 {
        return Err(Error::Parameter("sweep needs at least one view".into()));
    }
    let tau = T::PI() + T::PI();
    (0..n)
        .map(|i| {
            let yaw = tau * T::from_f64_lossy(i as f64) / T::from_f64_lossy(n as f64);
            CameraPose::new(center, yaw)
        })
        .collect()
}

/// Projects a world point through a pose and intrinsics.
///
/// Returns `None` when the point is on or behind the camera plane
/// (forward coordinate below [`BEHIND_CAMERA_EPSILON`]).
pub fn project_point<T: Scalar>(
    intr: &Intrinsics<T>,
    pose: &CameraPose<T>,
    p: Vec3<T>,
) -> Option<ProjectedPoint<T>> {
    let rel = p - pose.position;
    let forward = rel.dot(pose.forward());
    if forward <= T::from_f64_lossy(BEHIND_CAMERA_EPSILON) {
        return None;
    }
    let right = rel.dot(pose.right());
    let up = rel.dot(pose.up());
    Some(ProjectedPoint {
        u: intr.cx + intr.fx * (right / forward),
        v: intr.cy - intr.fy * (up / forward),
        depth: forward,
    })
}

/// True when the projection lands inside the image rectangle.
pub fn in_frustum<T: Scalar>(intr: &Intrinsics<T>, pose: &CameraPose<T>, p: Vec3<T>) -> bool {
    match project_point(intr, pose, p) {
        Some(proj) => {
            proj.u >= T::zero()
                && proj.u < T::from_f64_lossy(intr.width as f64)
                && proj.v >= T::zero()
                && proj.v < T::from_f64_lossy(intr.height as f64)
        }
        None => false,
    }
}

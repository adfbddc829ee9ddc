//! Core library for fine-grained 3D affordance reasoning over point-cloud scenes.
//!
//! Given a scanned indoor scene and a set of segmented affordance elements
//! (knobs, handles, switches, plugs), this crate provides the geometry half of
//! the pipeline:
//!
//! - [`pointcloud`]: PLY ingestion, spatial queries, and mask dilation,
//! - [`camera`]: virtual pinhole cameras and surround-sweep pose generation,
//! - [`render`]: a z-buffered point-splat renderer,
//! - [`descriptors`]: per-element geometry/semantics summaries,
//! - [`projection`]: 3D-to-2D box projection and collision-free labeling,
//! - [`motion`]: motion types and axis-direction primitives,
//! - [`eval`]: mask IoU, average precision, and motion-constrained variants.
//!
//! All geometric types are generic over the scalar type via [`Scalar`]
//! (any of `f32`/`f64`); concrete aliases for both precisions live at the
//! crate root.

pub mod camera;
pub mod descriptors;
pub mod error;
pub mod eval;
mod font;
pub mod motion;
pub mod pointcloud;
pub mod projection;
pub mod render;
pub mod scalar;
pub mod vec3;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use vec3::Vec3;

/// 3D vector / point, single precision.
pub type Vec3f = Vec3<f32>;
/// 3D vector / point, double precision.
pub type Vec3d = Vec3<f64>;

/// Point cloud, single precision.
pub type PointCloud32 = pointcloud::PointCloud<f32>;
/// Point cloud, double precision.
pub type PointCloud64 = pointcloud::PointCloud<f64>;

/// Axis-aligned bounding box, single precision.
pub type Aabb32 = pointcloud::Aabb<f32>;
/// Axis-aligned bounding box, double precision.
pub type Aabb64 = pointcloud::Aabb<f64>;

/// Camera intrinsics, single precision.
pub type Intrinsics32 = camera::Intrinsics<f32>;
/// Camera intrinsics, double precision.
pub type Intrinsics64 = camera::Intrinsics<f64>;

/// Camera pose, single precision.
pub type CameraPose32 = camera::CameraPose<f32>;
/// Camera pose, double precision.
pub type CameraPose64 = camera::CameraPose<f64>;

/// Element descriptor, single precision.
pub type Descriptor32 = descriptors::Descriptor<f32>;
/// Element descriptor, double precision.
pub type Descriptor64 = descriptors::Descriptor<f64>;

/// Rendered view, single precision.
pub type RenderedView32 = render::RenderedView<f32>;
/// Rendered view, double precision.
pub type RenderedView64 = render::RenderedView<f64>;

/// Annotated view, single precision.
pub type AnnotatedView32 = projection::AnnotatedView<f32>;
/// Annotated view, double precision.
pub type AnnotatedView64 = projection::AnnotatedView<f64>;

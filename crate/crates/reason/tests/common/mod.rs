//! Shared fixture: a tiny synthetic scene with three marked elements.

use afford3d_core::camera::intrinsics_from_fov;
use afford3d_core::descriptors::{build_descriptors, AffordanceType, ElementProposal};
use afford3d_core::pointcloud::{PointCloud, PointMask};
use afford3d_core::projection::annotate_view;
use afford3d_core::render::render_sweep;
use afford3d_core::Vec3;
use afford3d_reason::SceneArtifacts;

/// Builds a scene whose three elements sit in distinct directions from the
/// sweep center, with `n_views` annotated views of `size` pixels.
pub fn scene(n_views: u32, size: u32) -> SceneArtifacts<f64> {
    let mut positions = Vec::new();
    let mut clusters = Vec::new();
    // Element clusters along +x, +y, -x from the center at (0, 0, 1).
    for (cx, cy) in [(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0)] {
        let start = positions.len();
        for i in 0..8 {
            for j in 0..8 {
                positions.push(Vec3::new(
                    cx + (i as f64 - 3.5) * 0.02,
                    cy + (j as f64 - 3.5) * 0.02,
                    1.0 + ((i + j) % 3) as f64 * 0.02,
                ));
            }
        }
        clusters.push(start..positions.len());
    }
    let cloud = PointCloud::new(positions, None).unwrap();

    let types = [
        AffordanceType::HookPull,
        AffordanceType::KeyPress,
        AffordanceType::Rotate,
    ];
    let proposals: Vec<ElementProposal> = clusters
        .iter()
        .zip(types)
        .map(|(range, ty)| {
            ElementProposal::new(PointMask::new(range.clone().collect()), ty, 1.0).unwrap()
        })
        .collect();
    let descriptors = build_descriptors(&cloud, &proposals).unwrap();

    let intr = intrinsics_from_fov(90.0, size, size).unwrap();
    let center = Vec3::new(0.0, 0.0, 1.0);
    let views = render_sweep(&cloud, center, n_views, &intr, 1)
        .unwrap()
        .iter()
        .map(|v| annotate_view(v, &descriptors).unwrap())
        .collect();

    SceneArtifacts::new(cloud, proposals, descriptors, views).unwrap()
}

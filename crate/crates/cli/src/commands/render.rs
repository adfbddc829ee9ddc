use anyhow::{Context, Result};

use afford3d_core::camera::{intrinsics_from_fov, observation_center};
use afford3d_core::descriptors::{build_descriptors, load_proposals};
use afford3d_core::pointcloud::{load_ply, PointCloud};
use afford3d_core::render::render_sweep;

use crate::config::PipelineConfig;

use super::{sweep_path, view_png_path, write_json_pretty, PoseRecord, SweepFile};

/// Renders the surround sweep: `view_{i}.png` for i in 1..=views plus
/// `sweep.json` with the poses and intrinsics.
pub fn cmd_render(cfg: &PipelineConfig) -> Result<()> {
    let cloud_path = cfg.require_cloud()?;
    let cloud: PointCloud<f64> = load_ply(cloud_path)
        .with_context(|| format!("loading point cloud {}", cloud_path.display()))?;

    // The sweep centers on the elements when proposals are available and
    // falls back to the cloud's bounding-box center otherwise.
    let center = match &cfg.paths.proposals {
        Some(path) if path.exists() => {
            let proposals = load_proposals(path)
                .with_context(|| format!("loading proposals {}", path.display()))?;
            if proposals.is_empty() {
                cloud.bounds()?.center()
            } else {
                let descriptors = build_descriptors(&cloud, &proposals)?;
                observation_center(&cloud, &descriptors)?
            }
        }
        _ => cloud.bounds()?.center(),
    };

    let intrinsics = intrinsics_from_fov(cfg.fov_deg, cfg.image_size, cfg.image_size)?;
    let views = render_sweep(&cloud, center, cfg.views, &intrinsics, cfg.splat_radius_px)?;

    let out = cfg.output_dir();
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    for view in &views {
        view.image
            .save_png(view_png_path(&out, view.view_index))
            .context("writing view image")?;
    }

    let sweep = SweepFile {
        views: cfg.views,
        fov_deg: cfg.fov_deg,
        image_size: cfg.image_size,
        splat_radius_px: cfg.splat_radius_px,
        center,
        intrinsics,
        poses: views
            .iter()
            .map(|v| PoseRecord {
                view_index: v.view_index,
                pose: v.pose,
            })
            .collect(),
    };
    write_json_pretty(&sweep_path(&out), &sweep)
}

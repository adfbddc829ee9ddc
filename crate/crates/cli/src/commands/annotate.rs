use anyhow::{Context, Result};

use afford3d_core::descriptors::{build_descriptors, load_proposals};
use afford3d_core::pointcloud::{load_ply, PointCloud};
use afford3d_core::projection::annotate_view;
use afford3d_core::render::{Image, RenderedView};

use crate::config::PipelineConfig;

use super::{annotated_png_path, annotations_path, read_sweep, view_png_path, write_json_pretty};

/// Projects the element proposals into every rendered view: writes
/// `annotated_{i}.png` per view and one `annotations.json` with the boxes and
/// label placements of all views.
pub fn cmd_annotate(cfg: &PipelineConfig) -> Result<()> {
    let out = cfg.output_dir();
    let sweep = read_sweep(&out)?;

    let cloud_path = cfg.require_cloud()?;
    let cloud: PointCloud<f64> = load_ply(cloud_path)
        .with_context(|| format!("loading point cloud {}", cloud_path.display()))?;
    let proposals_path = cfg
        .paths
        .proposals
        .as_deref()
        .context("no proposals given (set --proposals or paths.proposals)")?;
    let proposals = load_proposals(proposals_path)
        .with_context(|| format!("loading proposals {}", proposals_path.display()))?;
    let descriptors = build_descriptors(&cloud, &proposals)?;

    let mut all_annotations = Vec::with_capacity(sweep.poses.len());
    for record in &sweep.poses {
        let png = view_png_path(&out, record.view_index);
        let image = Image::load_png(&png).with_context(|| {
            format!(
                "cannot read {} (run the `render` command first)",
                png.display()
            )
        })?;
        let view = RenderedView {
            image,
            pose: record.pose,
            intrinsics: sweep.intrinsics,
            view_index: record.view_index,
        };
        let annotated = annotate_view(&view, &descriptors)?;
        annotated
            .image
            .save_png(annotated_png_path(&out, record.view_index))
            .context("writing annotated image")?;
        all_annotations.push(annotated.annotations());
    }
    write_json_pretty(&annotations_path(&out), &all_annotations)
}

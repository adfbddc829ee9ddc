//! The four subcommands and the artifact files they exchange.
//!
//! `render` writes `view_{i}.png` plus `sweep.json`; `annotate` adds
//! `annotated_{i}.png` plus `annotations.json`; `run` consumes those and
//! writes `predictions.jsonl` plus per-task traces; `eval` scores the
//! predictions against ground truth into `report.json` / `report.txt`.

mod annotate;
mod eval;
mod render;
mod run;

pub use annotate::cmd_annotate;
pub use eval::cmd_eval;
pub use render::cmd_render;
pub use run::cmd_run;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use afford3d_core::camera::{CameraPose, Intrinsics};
use afford3d_core::Vec3;

/// Sweep metadata written by `render` and consumed downstream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFile {
    pub views: u32,
    pub fov_deg: f64,
    pub image_size: u32,
    pub splat_radius_px: u32,
    pub center: Vec3<f64>,
    pub intrinsics: Intrinsics<f64>,
    pub poses: Vec<PoseRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoseRecord {
    pub view_index: u32,
    pub pose: CameraPose<f64>,
}

/// One line of the tasks file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskLine {
    pub task_id: String,
    pub scene_id: String,
    pub text: String,
}

pub(crate) fn view_png_path(out: &Path, view_index: u32) -> PathBuf {
    out.join(format!("view_{view_index}.png"))
}

pub(crate) fn annotated_png_path(out: &Path, view_index: u32) -> PathBuf {
    out.join(format!("annotated_{view_index}.png"))
}

pub(crate) fn sweep_path(out: &Path) -> PathBuf {
    out.join("sweep.json")
}

pub(crate) fn annotations_path(out: &Path) -> PathBuf {
    out.join("annotations.json")
}

pub(crate) fn predictions_path(out: &Path) -> PathBuf {
    out.join("predictions.jsonl")
}

pub(crate) fn read_sweep(out: &Path) -> Result<SweepFile> {
    let path = sweep_path(out);
    let text = std::fs::read_to_string(&path).with_context(|| {
        format!(
            "cannot read {} (run the `render` command first)",
            path.display()
        )
    })?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

pub(crate) fn write_json_pretty(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

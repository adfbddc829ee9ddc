use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{Context, Result};

use afford3d_core::descriptors::{build_descriptors, load_proposals};
use afford3d_core::eval::{write_prediction_lines, PredictionLine};
use afford3d_core::pointcloud::{load_ply, PointCloud};
use afford3d_core::projection::{AnnotatedView, Box2D, LabelPlacement, ViewAnnotations};
use afford3d_core::render::{Image, RenderedView};
use afford3d_reason::{
    run_task, HttpBackend, HttpConfig, MockBackend, ReasoningOptions, SceneArtifacts,
    TaskInstruction, TaskTrace, VisionChatBackend,
};

use crate::config::{BackendConfig, PipelineConfig};

use super::{
    annotated_png_path, annotations_path, predictions_path, read_sweep, view_png_path, TaskLine,
};

/// Runs the three-step pipeline over every task. Backend and protocol
/// failures are isolated per task: the batch continues and the failure count
/// is returned (the caller turns a non-zero count into exit code 2).
pub fn cmd_run(cfg: &PipelineConfig) -> Result<usize> {
    let out = cfg.output_dir();
    let scene = load_scene(cfg, &out)?;
    let tasks = read_tasks(cfg.require_tasks()?)?;
    let backend = build_backend(cfg.require_backend()?)?;
    let options = ReasoningOptions {
        zoom_step1: cfg.zoom_step1,
    };

    let results = run_all(&scene, &tasks, backend.as_ref(), &options, cfg.workers);

    let traces_dir = out.join("traces");
    std::fs::create_dir_all(&traces_dir)
        .with_context(|| format!("cannot create {}", traces_dir.display()))?;

    let mut lines = Vec::with_capacity(tasks.len());
    let mut failures = 0usize;
    for (task, (trace, result)) in tasks.iter().zip(results) {
        write_trace(&traces_dir, &task.task_id, &trace)?;
        let line = match result {
            Ok(predictions) => PredictionLine {
                task_id: task.task_id.clone(),
                scene_id: Some(task.scene_id.clone()),
                predictions,
                error: None,
            },
            Err(e) => {
                failures += 1;
                eprintln!("task {} failed: {e}", task.task_id);
                PredictionLine {
                    task_id: task.task_id.clone(),
                    scene_id: Some(task.scene_id.clone()),
                    predictions: Vec::new(),
                    error: Some(e.to_string()),
                }
            }
        };
        lines.push(line);
    }
    write_prediction_lines(predictions_path(&out), &lines)?;
    Ok(failures)
}

type TaskResult = (
    TaskTrace,
    afford3d_reason::Result<Vec<afford3d_core::eval::TripletPrediction>>,
);

fn run_all(
    scene: &SceneArtifacts<f64>,
    tasks: &[TaskLine],
    backend: &dyn VisionChatBackend,
    options: &ReasoningOptions,
    workers: u32,
) -> Vec<TaskResult> {
    let run_one = |task: &TaskLine| -> TaskResult {
        match TaskInstruction::new(task.scene_id.clone(), task.text.clone()) {
            Ok(instr) => run_task(&task.task_id, scene, &instr, backend, options),
            Err(e) => (
                TaskTrace {
                    task_id: task.task_id.clone(),
                    scene_id: task.scene_id.clone(),
                    instruction: task.text.clone(),
                    steps: Vec::new(),
                },
                Err(e),
            ),
        }
    };

    if workers <= 1 {
        return tasks.iter().map(run_one).collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<TaskResult>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.min(tasks.len() as u32) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= tasks.len() {
                    break;
                }
                let result = run_one(&tasks[i]);
                slots.lock().expect("result lock")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .collect()
}

fn load_scene(cfg: &PipelineConfig, out: &Path) -> Result<SceneArtifacts<f64>> {
    let sweep = read_sweep(out)?;
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

    let ann_path = annotations_path(out);
    let ann_text = std::fs::read_to_string(&ann_path).with_context(|| {
        format!(
            "cannot read {} (run the `annotate` command first)",
            ann_path.display()
        )
    })?;
    let annotations: Vec<ViewAnnotations> = serde_json::from_str(&ann_text)
        .with_context(|| format!("{} is not valid JSON", ann_path.display()))?;

    let mut views = Vec::with_capacity(sweep.poses.len());
    for record in &sweep.poses {
        let base_png = view_png_path(out, record.view_index);
        let base_image = Image::load_png(&base_png).with_context(|| {
            format!(
                "cannot read {} (run the `render` command first)",
                base_png.display()
            )
        })?;
        let ann_png = annotated_png_path(out, record.view_index);
        let image = Image::load_png(&ann_png).with_context(|| {
            format!(
                "cannot read {} (run the `annotate` command first)",
                ann_png.display()
            )
        })?;
        let ann = annotations
            .iter()
            .find(|a| a.view_index == record.view_index)
            .with_context(|| {
                format!(
                    "{} has no entry for view {}",
                    ann_path.display(),
                    record.view_index
                )
            })?;
        let boxes: BTreeMap<u32, Box2D> = ann
            .boxes
            .iter()
            .map(|b| (b.id, Box2D::new(b.x_min, b.y_min, b.x_max, b.y_max)))
            .collect();
        let labels: Vec<LabelPlacement> = ann
            .labels
            .iter()
            .map(|l| LabelPlacement {
                element_id: l.id,
                rect: l.rect,
                anchor_used: l.anchor,
            })
            .collect();
        views.push(AnnotatedView {
            base: RenderedView {
                image: base_image,
                pose: record.pose,
                intrinsics: sweep.intrinsics,
                view_index: record.view_index,
            },
            boxes,
            labels,
            image,
        });
    }
    Ok(SceneArtifacts::new(cloud, proposals, descriptors, views)?)
}

fn read_tasks(path: &Path) -> Result<Vec<TaskLine>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read tasks file {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, line)| {
            serde_json::from_str(line)
                .with_context(|| format!("{}:{}: bad task line", path.display(), no + 1))
        })
        .collect()
}

fn build_backend(cfg: &BackendConfig) -> Result<Box<dyn VisionChatBackend>> {
    Ok(match cfg {
        BackendConfig::Mock { script } => Box::new(
            MockBackend::from_script_file(script)
                .with_context(|| format!("loading mock script {}", script.display()))?,
        ),
        BackendConfig::Http {
            endpoint,
            model,
            timeout_s,
        } => {
            let mut http = HttpConfig::new(endpoint.clone(), model.clone());
            http.timeout = Duration::from_secs(*timeout_s);
            Box::new(HttpBackend::new(http)?)
        }
    })
}

/// Task ids become file names; anything outside [A-Za-z0-9._-] is mapped.
fn sanitize(task_id: &str) -> String {
    task_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_trace(dir: &Path, task_id: &str, trace: &TaskTrace) -> Result<()> {
    let path = dir.join(format!("{}.jsonl", sanitize(task_id)));
    let mut text = String::new();
    for step in &trace.steps {
        text.push_str(&serde_json::to_string(step)?);
        text.push('\n');
    }
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

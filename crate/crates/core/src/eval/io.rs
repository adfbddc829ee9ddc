//! JSON-lines ingestion for predictions and ground truth (one task per
//! line), plus the fixed-width text rendering of a report.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::descriptors::AffordanceType;
use crate::error::{Error, Result};
use crate::motion::{AxisPrimitive, MotionType};
use crate::pointcloud::PointMask;

use super::{EvalReport, GroundTruthTriplet, MetricRow, TaskEval, TripletPrediction};

/// One line of a predictions file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionLine {
    pub task_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene_id: Option<String>,
    #[serde(default)]
    pub predictions: Vec<TripletPrediction>,
    /// Set when the pipeline failed this task; such lines score as empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GroundTruthRecord {
    mask: PointMask,
    motion_type: MotionType,
    axis_primitive: AxisPrimitive,
    affordance_type: AffordanceType,
}

/// One line of a ground-truth file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthLine {
    pub task_id: String,
    ground_truth: Vec<GroundTruthRecord>,
}

impl GroundTruthLine {
    pub fn new(task_id: String, triplets: &[GroundTruthTriplet]) -> Self {
        Self {
            task_id,
            ground_truth: triplets
                .iter()
                .map(|t| GroundTruthRecord {
                    mask: t.mask.clone(),
                    motion_type: t.motion_type,
                    axis_primitive: t.axis_primitive,
                    affordance_type: t.affordance_type,
                })
                .collect(),
        }
    }

    pub fn triplets(&self) -> Result<Vec<GroundTruthTriplet>> {
        self.ground_truth
            .iter()
            .map(|r| {
                GroundTruthTriplet::new(
                    self.task_id.clone(),
                    r.mask.clone(),
                    r.motion_type,
                    r.axis_primitive,
                    r.affordance_type,
                )
            })
            .collect()
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(e, path.display().to_string()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, line)| {
            serde_json::from_str(line).map_err(|e| {
                Error::Format(format!("{}:{}: {e}", path.display(), no + 1))
            })
        })
        .collect()
}

pub fn read_prediction_lines(path: impl AsRef<Path>) -> Result<Vec<PredictionLine>> {
    let lines: Vec<PredictionLine> = read_jsonl(path.as_ref())?;
    for line in &lines {
        for pred in &line.predictions {
            pred.validate().map_err(|e| {
                Error::Data(format!("task {:?}: {e}", line.task_id))
            })?;
        }
    }
    Ok(lines)
}

pub fn read_ground_truth_lines(path: impl AsRef<Path>) -> Result<Vec<GroundTruthLine>> {
    read_jsonl(path.as_ref())
}

pub fn write_prediction_lines(path: impl AsRef<Path>, lines: &[PredictionLine]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for line in lines {
        out.push_str(&serde_json::to_string(line)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(e, path.display().to_string()))
}

/// Pairs prediction lines with ground-truth lines by task id, strictly:
/// every task must appear exactly once on each side. Offending ids are
/// listed in the error. Task order follows the ground-truth file.
pub fn pair_tasks(
    predictions: &[PredictionLine],
    ground_truth: &[GroundTruthLine],
) -> Result<Vec<TaskEval>> {
    let mut seen = BTreeSet::new();
    for line in predictions {
        if !seen.insert(line.task_id.as_str()) {
            return Err(Error::InputMismatch(format!(
                "duplicate task id {:?} in predictions",
                line.task_id
            )));
        }
    }
    let mut seen_gt = BTreeSet::new();
    for line in ground_truth {
        if !seen_gt.insert(line.task_id.as_str()) {
            return Err(Error::InputMismatch(format!(
                "duplicate task id {:?} in ground truth",
                line.task_id
            )));
        }
    }

    let missing_preds: Vec<&str> = seen_gt.difference(&seen).copied().collect();
    let missing_gts: Vec<&str> = seen.difference(&seen_gt).copied().collect();
    if !missing_preds.is_empty() || !missing_gts.is_empty() {
        let mut msg = String::from("task ids do not line up");
        if !missing_preds.is_empty() {
            let _ = write!(msg, "; missing from predictions: {missing_preds:?}");
        }
        if !missing_gts.is_empty() {
            let _ = write!(msg, "; missing from ground truth: {missing_gts:?}");
        }
        return Err(Error::InputMismatch(msg));
    }

    ground_truth
        .iter()
        .map(|gt_line| {
            let pred_line = predictions
                .iter()
                .find(|p| p.task_id == gt_line.task_id)
                .expect("id sets are equal");
            Ok(TaskEval {
                task_id: gt_line.task_id.clone(),
                predictions: pred_line.predictions.clone(),
                ground_truth: gt_line.triplets()?,
            })
        })
        .collect()
}

fn pct(v: f64) -> String {
    format!("{:6.2}", v * 100.0)
}

fn row_line(name: &str, row: &MetricRow) -> String {
    format!(
        "{name:<10} {} {} {} {} {} {}   ({} tasks)\n",
        pct(row.miou),
        pct(row.ap),
        pct(row.ap50),
        pct(row.ap25),
        pct(row.ap25_t),
        pct(row.ap25_td),
        row.task_count
    )
}

/// Renders the report as a fixed-width table (values in percent).
pub fn format_report_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("             mIoU     AP   AP50   AP25     +T    +TD\n");
    let overall = MetricRow {
        miou: report.miou,
        ap: report.ap,
        ap50: report.ap50,
        ap25: report.ap25,
        ap25_t: report.ap25_t,
        ap25_td: report.ap25_td,
        task_count: report.task_count,
    };
    out.push_str(&row_line("overall", &overall));
    out.push_str(&row_line("unique", &report.per_cardinality.unique));
    out.push_str(&row_line("multiple", &report.per_cardinality.multiple));

    if !report.per_type.is_empty() {
        out.push_str("\nper affordance type (AP50)\n");
        for (ty, ap50) in &report.per_type {
            let _ = writeln!(out, "  {:<12} {}", ty.to_string(), pct(*ap50));
        }
    }
    if !report.warnings.is_empty() {
        out.push_str("\nwarnings\n");
        for w in &report.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}

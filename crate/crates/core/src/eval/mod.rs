//! Scoring harness: mask mIoU, average precision across IoU thresholds, and
//! the motion-constrained AP variants (+T requires the motion type to match,
//! +TD additionally the discretized axis direction).
//!
//! Matching is greedy in confidence order, the standard recipe for instance
//! AP. Pooled detections sort by confidence with (task_id, element_id) as the
//! tie key, so scores do not depend on task order.

mod io;

pub use io::{
    format_report_table, pair_tasks, read_ground_truth_lines, read_prediction_lines,
    write_prediction_lines, GroundTruthLine, PredictionLine,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::descriptors::AffordanceType;
use crate::error::{Error, Result};
use crate::motion::{AxisPrimitive, MotionType};
use crate::pointcloud::PointMask;

/// One annotated ground-truth interaction for a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthTriplet {
    pub task_id: String,
    pub mask: PointMask,
    pub motion_type: MotionType,
    pub axis_primitive: AxisPrimitive,
    /// Used only for per-type breakdowns.
    pub affordance_type: AffordanceType,
}

impl GroundTruthTriplet {
    pub fn new(
        task_id: String,
        mask: PointMask,
        motion_type: MotionType,
        axis_primitive: AxisPrimitive,
        affordance_type: AffordanceType,
    ) -> Result<Self> {
        if !axis_primitive.consistent_with(motion_type) {
            return Err(Error::Vocabulary(format!(
                "axis primitive {axis_primitive} cannot pair with {motion_type}"
            )));
        }
        Ok(Self {
            task_id,
            mask,
            motion_type,
            axis_primitive,
            affordance_type,
        })
    }
}

/// One predicted triplet: the element's 3D mask plus its inferred motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletPrediction {
    pub element_id: u32,
    pub mask: PointMask,
    pub motion_type: MotionType,
    pub axis_primitive: AxisPrimitive,
    pub confidence: f64,
}

impl TripletPrediction {
    pub fn new(
        element_id: u32,
        mask: PointMask,
        motion_type: MotionType,
        axis_primitive: AxisPrimitive,
        confidence: f64,
    ) -> Result<Self> {
        let p = Self {
            element_id,
            mask,
            motion_type,
            axis_primitive,
            confidence,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.axis_primitive.consistent_with(self.motion_type) {
            return Err(Error::Vocabulary(format!(
                "axis primitive {} cannot pair with {}",
                self.axis_primitive, self.motion_type
            )));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Range(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Predictions and ground truth for one task.
#[derive(Debug, Clone)]
pub struct TaskEval {
    pub task_id: String,
    pub predictions: Vec<TripletPrediction>,
    pub ground_truth: Vec<GroundTruthTriplet>,
}

/// Extra agreement a prediction must have with a GT to count as a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchConstraint {
    /// Mask IoU only.
    None,
    /// IoU plus motion-type equality (+T).
    Type,
    /// IoU plus motion type and axis primitive equality (+TD).
    TypeAndDirection,
}

impl MatchConstraint {
    fn satisfied(self, pred: &TripletPrediction, gt: &GroundTruthTriplet) -> bool {
        match self {
            MatchConstraint::None => true,
            MatchConstraint::Type => pred.motion_type == gt.motion_type,
            MatchConstraint::TypeAndDirection => {
                pred.motion_type == gt.motion_type && pred.axis_primitive == gt.axis_primitive
            }
        }
    }
}

/// `|a intersect b| / |a union b|`; 0 when both masks are empty.
pub fn mask_iou(a: &PointMask, b: &PointMask) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut inter) = (0usize, 0usize, 0usize);
    let (av, bv) = (a.indices(), b.indices());
    while i < av.len() && j < bv.len() {
        match av[i].cmp(&bv[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = av.len() + bv.len() - inter;
    inter as f64 / union as f64
}

/// Result of matching one task's predictions against its ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    /// `(prediction index, ground-truth index)` for each true positive.
    pub pairs: Vec<(usize, usize)>,
    /// Prediction indices that matched nothing.
    pub false_positives: Vec<usize>,
    /// Ground-truth indices nothing claimed.
    pub false_negatives: Vec<usize>,
}

/// Greedy one-to-one matching: predictions in confidence order (ties by
/// element id) each claim the unmatched GT with the highest IoU at or above
/// the threshold that also satisfies the constraint. IoU ties go to the
/// earliest GT.
pub fn match_predictions(
    preds: &[TripletPrediction],
    gts: &[GroundTruthTriplet],
    iou_threshold: f64,
    constraint: MatchConstraint,
) -> MatchOutcome {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[b]
            .confidence
            .partial_cmp(&preds[a].confidence)
            .expect("confidence is finite")
            .then(preds[a].element_id.cmp(&preds[b].element_id))
    });

    let mut gt_taken = vec![false; gts.len()];
    let mut pairs = Vec::new();
    let mut false_positives = Vec::new();
    for &pi in &order {
        let pred = &preds[pi];
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if gt_taken[gi] || !constraint.satisfied(pred, gt) {
                continue;
            }
            let iou = mask_iou(&pred.mask, &gt.mask);
            if iou >= iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                best = Some((gi, iou));
            }
        }
        match best {
            Some((gi, _)) => {
                gt_taken[gi] = true;
                pairs.push((pi, gi));
            }
            None => false_positives.push(pi),
        }
    }
    let false_negatives = (0..gts.len()).filter(|&gi| !gt_taken[gi]).collect();
    MatchOutcome {
        pairs,
        false_positives,
        false_negatives,
    }
}

/// Average precision plus a flag set when the GT pool was empty (the metric
/// is undefined there and reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApResult {
    pub value: f64,
    pub zero_gt: bool,
}

/// Pools every task's predictions at one threshold/constraint, sweeps the
/// confidence-sorted pool into a precision-recall curve, and integrates the
/// all-point interpolated curve (precision envelope made monotone).
pub fn average_precision(
    tasks: &[TaskEval],
    iou_threshold: f64,
    constraint: MatchConstraint,
) -> ApResult {
    struct Det<'a> {
        confidence: f64,
        task_id: &'a str,
        element_id: u32,
        tp: bool,
    }

    let total_gt: usize = tasks.iter().map(|t| t.ground_truth.len()).sum();
    if total_gt == 0 {
        return ApResult {
            value: 0.0,
            zero_gt: true,
        };
    }

    let mut pool: Vec<Det> = Vec::new();
    for task in tasks {
        let outcome =
            match_predictions(&task.predictions, &task.ground_truth, iou_threshold, constraint);
        let mut tp = vec![false; task.predictions.len()];
        for &(pi, _) in &outcome.pairs {
            tp[pi] = true;
        }
        for (pi, pred) in task.predictions.iter().enumerate() {
            pool.push(Det {
                confidence: pred.confidence,
                task_id: &task.task_id,
                element_id: pred.element_id,
                tp: tp[pi],
            });
        }
    }

    pool.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .expect("confidence is finite")
            .then(a.task_id.cmp(b.task_id))
            .then(a.element_id.cmp(&b.element_id))
    });

    let mut tp_cum = 0u64;
    let mut fp_cum = 0u64;
    let mut points: Vec<(u64, f64)> = Vec::with_capacity(pool.len()); // (tp count, precision)
    for det in &pool {
        if det.tp {
            tp_cum += 1;
        } else {
            fp_cum += 1;
        }
        points.push((tp_cum, tp_cum as f64 / (tp_cum + fp_cum) as f64));
    }

    // Precision envelope: running max from the right.
    for i in (0..points.len().saturating_sub(1)).rev() {
        points[i].1 = points[i].1.max(points[i + 1].1);
    }

    let mut acc = 0.0;
    let mut prev_tp = 0u64;
    for &(tp, p) in &points {
        acc += (tp - prev_tp) as f64 * p;
        prev_tp = tp;
    }
    ApResult {
        value: acc / total_gt as f64,
        zero_gt: false,
    }
}

/// The unconstrained AP column averages over these IoU thresholds.
pub fn ap_thresholds() -> [f64; 10] {
    let mut out = [0.0; 10];
    for (i, t) in out.iter_mut().enumerate() {
        *t = 0.50 + 0.05 * i as f64;
    }
    out
}

/// One row of metrics, as reported for the overall dataset and per subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub miou: f64,
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
    pub ap25_t: f64,
    pub ap25_td: f64,
    pub task_count: usize,
}

/// Per-cardinality breakdown: tasks referencing exactly one element vs
/// several. Tasks with no ground truth fall in neither bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerCardinality {
    pub unique: MetricRow,
    pub multiple: MetricRow,
}

/// Full evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub miou: f64,
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
    pub ap25_t: f64,
    pub ap25_td: f64,
    /// AP50 over the subset of tasks whose ground truth contains the type.
    pub per_type: BTreeMap<AffordanceType, f64>,
    pub per_cardinality: PerCardinality,
    pub task_count: usize,
    /// Non-fatal oddities, e.g. an empty GT pool behind some metric.
    pub warnings: Vec<String>,
}

fn union_mask_iou(task: &TaskEval) -> f64 {
    let pred_union: PointMask = task
        .predictions
        .iter()
        .flat_map(|p| p.mask.iter())
        .collect();
    let gt_union: PointMask = task
        .ground_truth
        .iter()
        .flat_map(|g| g.mask.iter())
        .collect();
    mask_iou(&pred_union, &gt_union)
}

fn metric_row(tasks: &[TaskEval], label: &str, warnings: &mut Vec<String>) -> MetricRow {
    if tasks.is_empty() {
        return MetricRow {
            miou: 0.0,
            ap: 0.0,
            ap50: 0.0,
            ap25: 0.0,
            ap25_t: 0.0,
            ap25_td: 0.0,
            task_count: 0,
        };
    }

    let mut warn = |name: &str, r: ApResult| {
        if r.zero_gt {
            warnings.push(format!("{label}{name}: zero ground truth in pool"));
        }
        r.value
    };

    // Summed in sorted order so the mean does not depend on task order.
    let mut ious: Vec<f64> = tasks.iter().map(union_mask_iou).collect();
    ious.sort_by(f64::total_cmp);
    let miou = ious.iter().sum::<f64>() / tasks.len() as f64;

    let thresholds = ap_thresholds();
    let ap = thresholds
        .iter()
        .map(|&t| warn(&format!("ap@{t:.2}"), average_precision(tasks, t, MatchConstraint::None)))
        .sum::<f64>()
        / thresholds.len() as f64;

    MetricRow {
        miou,
        ap,
        ap50: warn("ap50", average_precision(tasks, 0.50, MatchConstraint::None)),
        ap25: warn("ap25", average_precision(tasks, 0.25, MatchConstraint::None)),
        ap25_t: warn(
            "ap25+t",
            average_precision(tasks, 0.25, MatchConstraint::Type),
        ),
        ap25_td: warn(
            "ap25+td",
            average_precision(tasks, 0.25, MatchConstraint::TypeAndDirection),
        ),
        task_count: tasks.len(),
    }
}

/// Scores a whole dataset. mIoU is the per-task IoU between the union of
/// predicted masks and the union of GT masks, averaged over tasks; AP pools
/// predictions across tasks.
pub fn evaluate(tasks: &[TaskEval]) -> Result<EvalReport> {
    for task in tasks {
        for gt in &task.ground_truth {
            if gt.task_id != task.task_id {
                return Err(Error::InputMismatch(format!(
                    "ground-truth triplet labeled {:?} inside task {:?}",
                    gt.task_id, task.task_id
                )));
            }
        }
        for pred in &task.predictions {
            pred.validate()?;
        }
    }

    let mut warnings = Vec::new();
    let overall = metric_row(tasks, "", &mut warnings);

    let mut per_type = BTreeMap::new();
    for ty in AffordanceType::ALL {
        let subset: Vec<TaskEval> = tasks
            .iter()
            .filter(|t| t.ground_truth.iter().any(|g| g.affordance_type == ty))
            .cloned()
            .collect();
        if subset.is_empty() {
            continue;
        }
        let ap50 = average_precision(&subset, 0.50, MatchConstraint::None);
        per_type.insert(ty, ap50.value);
    }

    let unique: Vec<TaskEval> = tasks
        .iter()
        .filter(|t| t.ground_truth.len() == 1)
        .cloned()
        .collect();
    let multiple: Vec<TaskEval> = tasks
        .iter()
        .filter(|t| t.ground_truth.len() >= 2)
        .cloned()
        .collect();
    let per_cardinality = PerCardinality {
        unique: metric_row(&unique, "unique/", &mut warnings),
        multiple: metric_row(&multiple, "multiple/", &mut warnings),
    };

    Ok(EvalReport {
        miou: overall.miou,
        ap: overall.ap,
        ap50: overall.ap50,
        ap25: overall.ap25,
        ap25_t: overall.ap25_t,
        ap25_td: overall.ap25_td,
        per_type,
        per_cardinality,
        task_count: tasks.len(),
        warnings,
    })
}

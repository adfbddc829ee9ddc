use anyhow::{Context, Result};

use afford3d_core::eval::{
    evaluate, format_report_table, pair_tasks, read_ground_truth_lines, read_prediction_lines,
};

use crate::config::PipelineConfig;

use super::predictions_path;

/// Scores `predictions.jsonl` (from `run`) against the ground-truth file and
/// writes `report.json` plus `report.txt`. Returns the rendered table.
pub fn cmd_eval(cfg: &PipelineConfig) -> Result<String> {
    let out = cfg.output_dir();
    let pred_path = predictions_path(&out);
    let predictions = read_prediction_lines(&pred_path).with_context(|| {
        format!(
            "cannot read {} (run the `run` command first)",
            pred_path.display()
        )
    })?;
    let gt_path = cfg.require_ground_truth()?;
    let ground_truth = read_ground_truth_lines(gt_path)
        .with_context(|| format!("loading ground truth {}", gt_path.display()))?;

    let tasks = pair_tasks(&predictions, &ground_truth)?;
    let report = evaluate(&tasks)?;

    super::write_json_pretty(&out.join("report.json"), &report)?;
    let table = format_report_table(&report);
    std::fs::write(out.join("report.txt"), &table)
        .with_context(|| format!("cannot write report.txt in {}", out.display()))?;
    Ok(table)
}

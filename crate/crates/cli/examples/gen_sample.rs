//! Writes a ready-to-run sample dataset: synthetic apartment scene, element
//! proposals, tasks, ground truth, a correct mock script, and a config file.
//!
//! Usage: cargo run -p afford3d-cli --example gen_sample -- <dir>

use afford3d_cli::synthetic::SyntheticScene;

fn main() -> anyhow::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "sample".to_string());
    let dir = std::path::PathBuf::from(dir);

    let scene = SyntheticScene::build();
    scene.write_inputs(&dir)?;

    let script = scene.mock_script(8, None);
    std::fs::write(
        dir.join("mock_script.json"),
        serde_json::to_string_pretty(&script)?,
    )?;

    let config = serde_json::json!({
        "backend": {"mock": {"script": dir.join("mock_script.json")}},
        "paths": {
            "cloud": dir.join("scene.ply"),
            "proposals": dir.join("proposals.json"),
            "tasks": dir.join("tasks.jsonl"),
            "ground_truth": dir.join("ground_truth.jsonl"),
            "output": dir.join("out"),
        }
    });
    std::fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(&config)?,
    )?;

    println!("sample dataset written to {}", dir.display());
    println!("next: afford3d render --config {0}/config.json && afford3d annotate --config {0}/config.json && afford3d run --config {0}/config.json && afford3d eval --config {0}/config.json", dir.display());
    Ok(())
}

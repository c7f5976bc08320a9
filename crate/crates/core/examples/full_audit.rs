//! Runs the complete audit pipeline against a synthetic dataset: split,
//! train target/shadow/reference models, score every candidate, run all five
//! attacks, and print the consolidated metrics table.
//!
//! The config below is exactly what `mia-audit run --config audit.json`
//! accepts. Everything is derived from the single master seed, so rerunning
//! this example reproduces the same report byte for byte.
//!
//! ```sh
//! cargo run --release --example full_audit
//! ```

use mia_audit::pipeline::{cmd_run, render_summary_text, RunConfig};

fn main() -> mia_audit::Result<()> {
    let config: RunConfig = serde_json::from_value(serde_json::json!({
        "data": {
            "kind": "synthetic",
            "n_samples": 1200, "n_features": 8, "n_classes": 6,
            "separation": 2.0, "noise_std": 1.0, "seed": 5
        },
        "split": {"counts": [200, 100, 200, 100, 300, 200]},
        "target": {"hidden": [64], "train": {"epochs": 80, "batch_size": 32, "base_lr": 0.1}},
        "ldc": {"hidden": [32], "train": {"epochs": 40}},
        "salem": {"hidden": [16], "train": {"epochs": 40}},
        "lira": {"n_shadow": 4, "variance_floor": 0.25, "train": {"epochs": 30}},
        "lira_max_targets": 40,
        "seed": 42
    }))
    .expect("config literal is valid");

    let out_dir = std::env::temp_dir().join("mia-audit-full-audit-example");
    let reports = cmd_run(&config, &out_dir)?;

    let fpr_targets: Vec<f64> = reports[0].tpr_at_fpr.iter().map(|p| p.fpr).collect();
    let rows: Vec<_> = reports.iter().collect();
    print!("{}", render_summary_text(&rows, &fpr_targets));
    println!("\nartifacts in {}", out_dir.display());
    println!("regenerate the table any time with: mia-audit report {}", out_dir.display());
    Ok(())
}

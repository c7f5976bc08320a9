//! Feature-removal ablation: rerun the audit several times, each time hiding
//! one input of the learned membership classifier, and compare what each
//! feature contributes.
//!
//! Sweep cells run concurrently and each cell gets its own run directory
//! under the sweep root; `sweep.csv` collects one row per cell and attack.
//!
//! ```sh
//! cargo run --release --example ablation_sweep
//! ```

use mia_audit::pipeline::{cmd_ablate, AblationSpec, RunConfig, SweepRow};

fn main() -> mia_audit::Result<()> {
    let run: RunConfig = serde_json::from_value(serde_json::json!({
        "data": {
            "kind": "synthetic",
            "n_samples": 800, "n_features": 8, "n_classes": 6,
            "separation": 2.0, "noise_std": 1.0, "seed": 5
        },
        "split": {"counts": [150, 75, 150, 75, 200, 150]},
        "target": {"hidden": [64], "train": {"epochs": 60, "batch_size": 32, "base_lr": 0.1}},
        "ldc": {"hidden": [32], "train": {"epochs": 40}},
        "attacks": ["ldc"],
        "seed": 42
    }))
    .expect("config literal is valid");

    let ablation: AblationSpec = serde_json::from_value(serde_json::json!({
        "kind": "feature_removal",
        "grid": ["drop_label", "drop_s_target", "drop_s_cal"],
        "repeats": 3
    }))
    .expect("ablation literal is valid");

    let sweep_dir = std::env::temp_dir().join("mia-audit-ablation-example");
    let rows = cmd_ablate(&run, &ablation, &sweep_dir)?;

    let mean_auc = |value: &str| -> f64 {
        let cells: Vec<&SweepRow> = rows.iter().filter(|r| r.value == value).collect();
        cells.iter().filter_map(|r| r.auc).sum::<f64>() / cells.len() as f64
    };
    println!("dropped feature  mean auc over 3 seeds");
    for drop in ["drop_label", "drop_s_target", "drop_s_cal"] {
        println!("{drop:>15}  {:.4}", mean_auc(drop));
    }
    println!("\nthe feature whose removal hurts most is the one the attack leans on");
    println!("full table: {}", sweep_dir.join("sweep.csv").display());
    Ok(())
}

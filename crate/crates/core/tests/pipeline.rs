//! End-to-end pipeline tests on a small synthetic dataset.

use std::path::Path;

use mia_audit::pipeline::{
    cmd_attack, cmd_report, cmd_run, cmd_score, Manifest, RunConfig,
};

/// Small but complete config: all five attacks, tiny models, quick epochs.
fn demo_config(seed: u64) -> RunConfig {
    serde_json::from_value(serde_json::json!({
        "data": {"kind": "synthetic", "n_samples": 200, "n_features": 4,
                 "n_classes": 3, "separation": 2.0, "noise_std": 1.0, "seed": 5},
        "split": {"counts": [40, 20, 40, 20, 40, 40]},
        "target": {"hidden": [16], "train": {"epochs": 15, "batch_size": 16, "base_lr": 0.1,
                   "optimizer": "sgdm", "momentum": 0.9, "nesterov": true,
                   "lr_schedule": "cosine", "seed": 0}},
        "ldc": {"hidden": [8],
                "features": {"use_s_target": true, "use_s_cal": true, "use_label": true},
                "train": {"epochs": 15, "batch_size": 16, "base_lr": 0.1,
                          "optimizer": "sgdm", "momentum": 0.9, "nesterov": true,
                          "lr_schedule": "cosine", "seed": 0},
                "seed": 0},
        "salem": {"hidden": [8],
                  "train": {"epochs": 15, "batch_size": 16, "base_lr": 0.1,
                            "optimizer": "sgdm", "momentum": 0.9, "nesterov": true,
                            "lr_schedule": "cosine", "seed": 0},
                  "seed": 0},
        "lira": {"n_shadow": 2, "variance_floor": 0.25, "seed": 0,
                 "train": {"epochs": 5, "batch_size": 16, "base_lr": 0.1,
                           "optimizer": "sgdm", "momentum": 0.9, "nesterov": true,
                           "lr_schedule": "cosine", "seed": 0}},
        "lira_max_targets": 8,
        "seed": seed,
    }))
    .unwrap()
}

const EXPECTED_ARTIFACTS: &[&str] = &[
    "config.json",
    "split.json",
    "normalization.json",
    "training.json",
    "models/target.mlpm",
    "models/shadow.mlpm",
    "models/reference.mlpm",
    "records/target.csv",
    "records/shadow.csv",
    "attacks/yeom.json",
    "attacks/salem.json",
    "attacks/watson.json",
    "attacks/ldc.json",
    "attacks/lira.json",
    "metrics/yeom.json",
    "metrics/salem.json",
    "metrics/watson.json",
    "metrics/ldc.json",
    "metrics/lira.json",
];

fn read(dir: &Path, relative: &str) -> Vec<u8> {
    std::fs::read(dir.join(relative)).unwrap_or_else(|e| panic!("{relative}: {e}"))
}

#[test]
fn full_run_writes_all_artifacts_and_a_valid_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = demo_config(42);
    let rows = cmd_run(&config, dir.path()).unwrap();

    let names: Vec<&str> = rows.iter().map(|r| r.attack.as_str()).collect();
    assert_eq!(names, ["yeom", "salem", "watson", "ldc", "lira"]);
    for row in &rows {
        assert!(row.auc.is_finite() && (0.0..=1.0).contains(&row.auc));
        assert!((0.5..=1.0).contains(&row.balanced_accuracy));
        assert_eq!(row.tpr_at_fpr.len(), 3);
    }
    // Everything on disk, hashed, and consistent.
    for relative in EXPECTED_ARTIFACTS {
        assert!(dir.path().join(relative).exists(), "missing {relative}");
    }
    for report_file in ["report/summary.csv", "report/summary.txt", "report/ldc_roc.csv"] {
        assert!(dir.path().join(report_file).exists(), "missing {report_file}");
    }
    let manifest = Manifest::load(dir.path()).unwrap();
    manifest.verify(dir.path()).unwrap();
    for relative in EXPECTED_ARTIFACTS {
        assert!(manifest.artifacts.contains_key(*relative), "manifest lacks {relative}");
    }
    for stage in ["split", "target-init", "shadow-shuffle", "reference-init", "ldc", "salem", "lira", "lira-targets"] {
        assert!(manifest.seeds.contains_key(stage), "manifest lacks seed {stage}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let config = demo_config(7);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_run(&config, a.path()).unwrap();
    cmd_run(&config, b.path()).unwrap();
    for relative in EXPECTED_ARTIFACTS {
        assert_eq!(
            read(a.path(), relative),
            read(b.path(), relative),
            "{relative} differs between identical runs"
        );
    }
    assert_eq!(read(a.path(), "manifest.json"), read(b.path(), "manifest.json"));
    assert_eq!(read(a.path(), "report/summary.csv"), read(b.path(), "report/summary.csv"));
}

#[test]
fn different_seeds_change_outcomes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_run(&demo_config(1), a.path()).unwrap();
    cmd_run(&demo_config(2), b.path()).unwrap();
    assert_ne!(read(a.path(), "split.json"), read(b.path(), "split.json"));
    assert_ne!(read(a.path(), "attacks/yeom.json"), read(b.path(), "attacks/yeom.json"));
}

#[test]
fn score_then_attack_reproduces_a_full_run() {
    let config = demo_config(11);
    let split_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();

    cmd_score(&config, split_dir.path()).unwrap();
    assert!(split_dir.path().join("records/target.csv").exists());
    assert!(!split_dir.path().join("attacks").join("yeom.json").exists());
    let rows = cmd_attack(&config, split_dir.path()).unwrap();
    assert_eq!(rows.len(), 5);

    cmd_run(&config, run_dir.path()).unwrap();
    for relative in EXPECTED_ARTIFACTS {
        assert_eq!(
            read(split_dir.path(), relative),
            read(run_dir.path(), relative),
            "{relative} differs between run and score+attack"
        );
    }
}

#[test]
fn attack_rejects_mismatched_configs_and_missing_directories() {
    let config = demo_config(3);
    let dir = tempfile::tempdir().unwrap();
    cmd_score(&config, dir.path()).unwrap();

    let mut other = demo_config(3);
    other.ni_threshold = 0.5;
    let err = cmd_attack(&other, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("does not match"));

    let empty = tempfile::tempdir().unwrap();
    let err = cmd_attack(&config, empty.path()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn report_regenerates_and_detects_tampering() {
    let config = demo_config(13);
    let dir = tempfile::tempdir().unwrap();
    cmd_run(&config, dir.path()).unwrap();

    let before = read(dir.path(), "report/summary.csv");
    let rows = cmd_report(dir.path(), None).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(read(dir.path(), "report/summary.csv"), before);

    // Redirected output leaves the run directory untouched.
    let elsewhere = tempfile::tempdir().unwrap();
    cmd_report(dir.path(), Some(elsewhere.path())).unwrap();
    assert_eq!(read(elsewhere.path(), "summary.csv"), before);

    // A modified artifact is refused by name.
    let target = dir.path().join("attacks/yeom.json");
    let mut text = std::fs::read_to_string(&target).unwrap();
    text = text.replacen("-0.", "-1.", 1);
    std::fs::write(&target, text).unwrap();
    let err = cmd_report(dir.path(), None).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("yeom.json"), "unhelpful error: {err}");
}

#[test]
fn missing_csv_fails_in_the_ingest_stage() {
    let mut config = demo_config(1);
    config.data = serde_json::from_value(serde_json::json!({
        "kind": "csv", "path": "/nonexistent/rows.csv", "label_column": "y",
    }))
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_run(&config, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("ingest"));
    // The run directory and resolved config survive the failure.
    assert!(dir.path().join("config.json").exists());
}

#[test]
fn oversized_split_fails_in_the_split_stage() {
    let mut config = demo_config(1);
    config.split = serde_json::from_value(serde_json::json!({
        "counts": [4000, 20, 40, 20, 40, 40],
    }))
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_run(&config, dir.path()).unwrap_err();
    assert!(err.to_string().contains("split"));
    assert!(dir.path().join("normalization.json").exists());
}

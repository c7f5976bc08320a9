//! End-to-end tests of the `mia-audit` binary: verbs, exit codes, and the
//! output-directory fallbacks.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mia-audit");

fn tiny_config() -> serde_json::Value {
    serde_json::json!({
        "data": {"kind": "synthetic", "n_samples": 200, "n_features": 4,
                 "n_classes": 3, "separation": 2.0, "noise_std": 1.0, "seed": 5},
        "split": {"counts": [40, 20, 40, 20, 40, 40]},
        "target": {"hidden": [16], "train": {"epochs": 6, "batch_size": 16, "base_lr": 0.1}},
        "attacks": ["yeom", "watson"],
        "seed": 42
    })
}

fn write_config(dir: &Path, value: &serde_json::Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("MIA_AUDIT_OUT");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().unwrap()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn score_attack_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &tiny_config());
    let config = config.to_str().unwrap();
    let out = dir.path().join("run");
    let out_str = out.to_str().unwrap();

    let scored = run(&["score", "--config", config, "--out", out_str, "--parallelism", "2"], &[]);
    assert!(scored.status.success(), "score failed: {}", stderr(&scored));
    assert!(out.join("records/target.csv").exists());
    assert!(!out.join("attacks").join("yeom.json").exists());

    let attacked = run(&["attack", "--config", config, "--out", out_str], &[]);
    assert!(attacked.status.success(), "attack failed: {}", stderr(&attacked));
    let table = stdout(&attacked);
    assert!(table.contains("yeom") && table.contains("watson"), "missing rows: {table}");
    assert!(table.contains("tpr@0.0001"));

    let reported = run(&["report", out_str], &[]);
    assert!(reported.status.success(), "report failed: {}", stderr(&reported));
    assert!(out.join("report/summary.csv").exists());
    assert_eq!(stdout(&reported).lines().count(), stdout(&attacked).lines().count());
}

#[test]
fn run_verb_honors_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &tiny_config());
    let config = config.to_str().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");

    for (out, seed) in [(&out_a, "7"), (&out_b, "7"), (&out_c, "8")] {
        let done = run(
            &["run", "--config", config, "--seed", seed, "--out", out.to_str().unwrap()],
            &[],
        );
        assert!(done.status.success(), "run failed: {}", stderr(&done));
    }
    let summary = |dir: &Path| std::fs::read(dir.join("report/summary.csv")).unwrap();
    assert_eq!(summary(&out_a), summary(&out_b));
    assert_ne!(summary(&out_a), summary(&out_c));
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &tiny_config());
    let out = dir.path().join("from-env");

    let done = run(
        &["score", "--config", config.to_str().unwrap()],
        &[("MIA_AUDIT_OUT", out.to_str().unwrap())],
    );
    assert!(done.status.success(), "score failed: {}", stderr(&done));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn ablate_verb_writes_the_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = serde_json::json!({
        "run": tiny_config(),
        "ablation": {"kind": "optimizer_sweep", "grid": ["sgd", "adam"], "repeats": 1}
    });
    let config = write_config(dir.path(), &sweep);
    let out = dir.path().join("sweep");

    let done = run(
        &["ablate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(done.status.success(), "ablate failed: {}", stderr(&done));
    assert!(stdout(&done).contains("4 rows, 0 failed cells"), "got: {}", stdout(&done));
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn config_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();

    let malformed = dir.path().join("broken.json");
    std::fs::write(&malformed, "{not json").unwrap();
    let broken = run(&["run", "--config", malformed.to_str().unwrap()], &[]);
    assert_eq!(broken.status.code(), Some(2));
    assert!(stderr(&broken).contains("config error"), "got: {}", stderr(&broken));

    let mut invalid = tiny_config();
    invalid["attacks"] = serde_json::json!([]);
    let config = write_config(dir.path(), &invalid);
    let rejected = run(&["run", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(rejected.status.code(), Some(2));

    // Clap's own usage errors share the config exit code.
    let usage = run(&["run"], &[]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn data_problems_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = tiny_config();
    config["data"] = serde_json::json!({
        "kind": "csv",
        "path": dir.path().join("absent.csv"),
        "label_column": "label"
    });
    let path = write_config(dir.path(), &config);
    let out = dir.path().join("run");

    let failed = run(
        &["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(failed.status.code(), Some(3));
    assert!(stderr(&failed).contains("ingest"), "got: {}", stderr(&failed));
}

#[test]
fn report_on_a_missing_run_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing-here");
    let failed = run(&["report", missing.to_str().unwrap()], &[]);
    assert_eq!(failed.status.code(), Some(3));
}

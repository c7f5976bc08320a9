//! Experiment orchestration: run configs, the end-to-end audit pipeline,
//! ablation sweeps, and reproducible reports.
//!
//! A run directory is self-describing: the resolved config, every model and
//! table it produced, per-attack outputs and metrics, and a manifest of
//! content hashes and derived seeds. Reports can be regenerated from it at
//! any time and refuse artifacts that no longer match their hashes.

pub mod ablate;
pub mod config;
pub mod manifest;
pub mod report;
pub mod run;

pub use ablate::{
    cmd_ablate, load_sweep_config, AblationKind, AblationSpec, FeatureDrop, SweepConfig, SweepRow,
};
pub use config::{
    load_run_config, resolve_out_dir, AttackKind, DataSource, ModelSpec, RunConfig, OUT_DIR_ENV,
};
pub use manifest::{sha256_file, Manifest, MANIFEST_FILE};
pub use report::{
    cmd_report, compute_metrics, load_metrics_report, render_summary_text, save_metrics_report,
    MetricsReport, OperatingPoint,
};
pub use run::{cmd_attack, cmd_run, cmd_score, ScoredRun, TrainSummary};

//! Ablation sweeps: rerun the pipeline over a grid of one varied setting,
//! several seeds per grid point, and collect a long-format results table.

use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SplitSizes;
use crate::error::{Error, Result};
use crate::nn::{DpConfig, Optimizer};
use crate::pipeline::config::RunConfig;
use crate::pipeline::run::cmd_run;
use crate::seeds::derive_seed;

/// Which LDC classifier input to drop in a feature-removal sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureDrop {
    DropLabel,
    DropSTarget,
    DropSCal,
}

impl FeatureDrop {
    pub fn name(self) -> &'static str {
        match self {
            FeatureDrop::DropLabel => "drop_label",
            FeatureDrop::DropSTarget => "drop_s_target",
            FeatureDrop::DropSCal => "drop_s_cal",
        }
    }
}

fn default_clip_bound() -> f64 {
    10.0
}

/// The sweep family and its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AblationKind {
    /// Remove one LDC input feature per grid point.
    FeatureRemoval { grid: Vec<FeatureDrop> },
    /// Vary the target (and shadow) training-set size.
    TrainSizeSweep { grid: Vec<usize> },
    /// Vary the reference model's training-set size.
    AuxSizeSweep { grid: Vec<usize> },
    /// Vary the optimizer used to train all three pipeline models.
    OptimizerSweep { grid: Vec<Optimizer> },
    /// Train the target with differential privacy, varying the noise
    /// multiplier at a fixed clip bound.
    DpSweep {
        grid: Vec<f64>,
        #[serde(default = "default_clip_bound")]
        clip_bound: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSpec {
    #[serde(flatten)]
    pub kind: AblationKind,
    /// Independent repetitions per grid value, each with its own derived
    /// seed shared across the grid.
    pub repeats: usize,
}

impl AblationSpec {
    pub fn validate(&self, base: &RunConfig) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("ablation needs at least one repeat".into()));
        }
        let grid_len = match &self.kind {
            AblationKind::FeatureRemoval { grid } => {
                if !base.attacks.contains(&crate::pipeline::config::AttackKind::Ldc) {
                    return Err(Error::Config(
                        "feature_removal varies the ldc classifier, but ldc is not in the attack list"
                            .into(),
                    ));
                }
                for (i, d) in grid.iter().enumerate() {
                    if grid[..i].contains(d) {
                        return Err(Error::Config(format!("{} listed twice", d.name())));
                    }
                }
                grid.len()
            }
            AblationKind::TrainSizeSweep { grid } | AblationKind::AuxSizeSweep { grid } => {
                if !matches!(base.split, SplitSizes::Counts(_)) {
                    return Err(Error::Config(
                        "size sweeps need absolute split counts, not fractions".into(),
                    ));
                }
                if grid.iter().any(|&n| n == 0) {
                    return Err(Error::Config("split sizes must be positive".into()));
                }
                grid.len()
            }
            AblationKind::OptimizerSweep { grid } => grid.len(),
            AblationKind::DpSweep { grid, clip_bound } => {
                if grid.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
                    return Err(Error::Config(
                        "noise multipliers must be finite and non-negative".into(),
                    ));
                }
                if !(*clip_bound > 0.0) {
                    return Err(Error::Config(format!(
                        "clip bound must be positive, got {clip_bound}"
                    )));
                }
                grid.len()
            }
        };
        if grid_len == 0 {
            return Err(Error::Config("ablation grid is empty".into()));
        }
        Ok(())
    }

    fn grid_labels(&self) -> Vec<String> {
        match &self.kind {
            AblationKind::FeatureRemoval { grid } => {
                grid.iter().map(|d| d.name().to_string()).collect()
            }
            AblationKind::TrainSizeSweep { grid } | AblationKind::AuxSizeSweep { grid } => {
                grid.iter().map(|n| n.to_string()).collect()
            }
            AblationKind::OptimizerSweep { grid } => grid
                .iter()
                .map(|o| {
                    serde_json::to_string(o).unwrap_or_default().trim_matches('"').to_string()
                })
                .collect(),
            AblationKind::DpSweep { grid, .. } => grid.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            AblationKind::FeatureRemoval { .. } => "feature_removal",
            AblationKind::TrainSizeSweep { .. } => "train_size_sweep",
            AblationKind::AuxSizeSweep { .. } => "aux_size_sweep",
            AblationKind::OptimizerSweep { .. } => "optimizer_sweep",
            AblationKind::DpSweep { .. } => "dp_sweep",
        }
    }
}

/// A sweep config file: the base run plus the ablation to apply to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub run: RunConfig,
    pub ablation: AblationSpec,
}

/// Reads and validates a sweep config from a JSON file.
pub fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: SweepConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.run.validate()?;
    config.ablation.validate(&config.run)?;
    Ok(config)
}

/// Applies grid point `g` of the sweep to a copy of the base config.
fn cell_config(base: &RunConfig, spec: &AblationSpec, g: usize, seed: u64) -> RunConfig {
    let mut config = base.clone();
    config.seed = seed;
    config.out_dir = None;
    match &spec.kind {
        AblationKind::FeatureRemoval { grid } => match grid[g] {
            FeatureDrop::DropLabel => config.ldc.features.use_label = false,
            FeatureDrop::DropSTarget => config.ldc.features.use_s_target = false,
            FeatureDrop::DropSCal => config.ldc.features.use_s_cal = false,
        },
        AblationKind::TrainSizeSweep { grid } => {
            // The shadow split tracks the target split so the attacker's
            // stand-in stays faithful to what it imitates.
            if let SplitSizes::Counts(ref mut counts) = config.split {
                counts[0] = grid[g];
                counts[2] = grid[g];
            }
        }
        AblationKind::AuxSizeSweep { grid } => {
            if let SplitSizes::Counts(ref mut counts) = config.split {
                counts[4] = grid[g];
            }
        }
        AblationKind::OptimizerSweep { grid } => {
            config.target.train.optimizer = grid[g];
            if let Some(ref mut shadow) = config.shadow {
                shadow.train.optimizer = grid[g];
            }
            if let Some(ref mut reference) = config.reference {
                reference.train.optimizer = grid[g];
            }
        }
        AblationKind::DpSweep { grid, clip_bound } => {
            config.target.train.dp = Some(DpConfig {
                clip_bound: *clip_bound,
                noise_multiplier: grid[g],
                seed: 0,
            });
        }
    }
    config
}

/// One attack's metrics at one sweep cell, or the cell's failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: String,
    pub value: String,
    pub repeat: usize,
    pub seed: u64,
    pub attack: String,
    pub auc: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub tpr_at_fpr: Vec<Option<f64>>,
    pub error: Option<String>,
}

/// Runs the sweep: every grid value times every repeat, each cell a full
/// pipeline run in its own subdirectory. Cell failures become rows with an
/// error message instead of aborting the sweep. Rows are written to
/// `sweep.csv` under `sweep_dir` and also returned.
pub fn cmd_ablate(
    base: &RunConfig,
    spec: &AblationSpec,
    sweep_dir: &Path,
) -> Result<Vec<SweepRow>> {
    base.validate()?;
    spec.validate(base)?;
    std::fs::create_dir_all(sweep_dir).map_err(|e| Error::io(sweep_dir, e))?;

    let labels = spec.grid_labels();
    let cells: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|g| (0..spec.repeats).map(move |r| (g, r)))
        .collect();

    // Cells run concurrently, each writing only inside its own directory.
    // Row order is restored afterwards so the CSV is deterministic.
    let rows = Mutex::new(Vec::new());
    cells.par_iter().for_each(|&(g, r)| {
        let seed = derive_seed(base.seed, "repeat", r as u64);
        let config = cell_config(base, spec, g, seed);
        let cell_dir = sweep_dir.join("cells").join(format!(
            "{}_{}_r{}",
            spec.kind_name(),
            labels[g].replace('.', "p"),
            r
        ));
        let outcome = cmd_run(&config, &cell_dir);
        let mut rows = rows.lock().expect("sweep row collection poisoned");
        match outcome {
            Ok(reports) => {
                for report in reports {
                    rows.push((
                        g,
                        r,
                        SweepRow {
                            kind: spec.kind_name().to_string(),
                            value: labels[g].clone(),
                            repeat: r,
                            seed,
                            attack: report.attack.clone(),
                            auc: Some(report.auc),
                            balanced_accuracy: Some(report.balanced_accuracy),
                            tpr_at_fpr: report
                                .tpr_at_fpr
                                .iter()
                                .map(|p| Some(p.tpr))
                                .collect(),
                            error: None,
                        },
                    ));
                }
            }
            Err(e) => rows.push((
                g,
                r,
                SweepRow {
                    kind: spec.kind_name().to_string(),
                    value: labels[g].clone(),
                    repeat: r,
                    seed,
                    attack: String::new(),
                    auc: None,
                    balanced_accuracy: None,
                    tpr_at_fpr: vec![None; base.fpr_targets.len()],
                    error: Some(e.to_string()),
                },
            )),
        }
    });

    let mut rows = rows.into_inner().expect("sweep row collection poisoned");
    rows.sort_by(|a, b| (a.0, a.1, &a.2.attack).cmp(&(b.0, b.1, &b.2.attack)));
    let rows: Vec<SweepRow> = rows.into_iter().map(|(_, _, row)| row).collect();
    write_sweep_csv(&rows, &base.fpr_targets, &sweep_dir.join("sweep.csv"))?;
    Ok(rows)
}

fn write_sweep_csv(rows: &[SweepRow], fpr_targets: &[f64], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let write_err = |e| Error::io(path, e);
    let mut header = String::from("kind,value,repeat,seed,attack,auc,balanced_accuracy");
    for t in fpr_targets {
        header.push_str(&format!(",tpr_at_fpr_{t}"));
    }
    header.push_str(",error");
    writeln!(w, "{header}").map_err(write_err)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for row in rows {
        write!(
            w,
            "{},{},{},{},{},{},{}",
            row.kind,
            row.value,
            row.repeat,
            row.seed,
            row.attack,
            fmt(row.auc),
            fmt(row.balanced_accuracy),
        )
        .map_err(write_err)?;
        for t in &row.tpr_at_fpr {
            write!(w, ",{}", fmt(*t)).map_err(write_err)?;
        }
        let error = row.error.as_deref().unwrap_or_default().replace(',', ";");
        writeln!(w, ",{error}").map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

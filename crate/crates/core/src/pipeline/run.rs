//! End-to-end pipeline: ingest, split, train, score, attack, evaluate.
//!
//! `cmd_run` does everything in one process. `cmd_score` stops after score
//! records are on disk; `cmd_attack` resumes from those artifacts. All
//! artifacts live under one run directory and are content-hashed into its
//! manifest; artifacts from completed stages survive later failures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attacks::{
    lira_lite, watson_attack, yeom_attack, AttackOutput, LdcClassifier, LdcConfig, LiraConfig,
    SalemAttack, SalemConfig,
};
use crate::data::{
    generate_synthetic, load_csv, six_way_split, FeatureStats, LabeledDataset, SixWaySplit,
    SplitSpec,
};
use crate::error::{Error, Result};
use crate::nn::{load_model, save_model, train, DpConfig, MlpConfig, MlpModel, TrainConfig};
use crate::pipeline::config::{AttackKind, DataSource, ModelSpec, RunConfig};
use crate::pipeline::manifest::{sha256_file, Manifest};
use crate::pipeline::report::{compute_metrics, save_metrics_report, write_report_files, MetricsReport};
use crate::scores::{build_records, load_records, save_records, AuxEmbeddings, ScoreRecord};
use crate::seeds::derive_seed;

pub const CONFIG_FILE: &str = "config.json";
pub const SPLIT_FILE: &str = "split.json";
pub const NORMALIZATION_FILE: &str = "normalization.json";
pub const TRAINING_FILE: &str = "training.json";
pub const TARGET_RECORDS_FILE: &str = "records/target.csv";
pub const SHADOW_RECORDS_FILE: &str = "records/shadow.csv";

pub fn model_file(role: &str) -> String {
    format!("models/{role}.mlpm")
}

pub fn attack_file(name: &str) -> String {
    format!("attacks/{name}.json")
}

pub fn metrics_file(name: &str) -> String {
    format!("metrics/{name}.json")
}

/// Per-model training summary written alongside the models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub final_loss: f64,
    /// Accuracy on the rows the model trained on.
    pub train_accuracy: f64,
    /// Accuracy on this model's evaluation rows (test or held-out split).
    pub eval_accuracy: f64,
    /// Largest per-example clipped gradient norm seen, when training with
    /// differential privacy.
    pub max_clipped_grad_norm: Option<f64>,
}

/// Everything the attack stages need from the scoring stages.
pub struct ScoredRun {
    pub dataset: LabeledDataset,
    pub split: SixWaySplit,
    pub target: MlpModel,
    pub shadow: MlpModel,
    pub reference: MlpModel,
    pub target_records: Vec<ScoreRecord>,
    pub shadow_records: Vec<ScoreRecord>,
}

struct RunContext {
    config: RunConfig,
    out_dir: PathBuf,
    manifest: Manifest,
}

/// The config as stored in the run directory: output location stripped
/// (the directory speaks for itself), everything else resolved.
fn stored_config(config: &RunConfig) -> RunConfig {
    RunConfig { out_dir: None, ..config.clone() }
}

fn data_digest(config: &RunConfig) -> Result<String> {
    match &config.data {
        DataSource::Csv { path, .. } => sha256_file(path),
        DataSource::Synthetic(spec) => {
            let bytes = serde_json::to_vec(spec)
                .map_err(|e| Error::Config(format!("spec serialization: {e}")))?;
            Ok(hex::encode(Sha256::digest(&bytes)))
        }
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl RunContext {
    /// Creates the run directory tree and writes the resolved config.
    fn create(config: &RunConfig, out_dir: &Path) -> Result<Self> {
        config.validate()?;
        for sub in ["", "models", "records", "attacks", "metrics"] {
            let dir = out_dir.join(sub);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        let config_path = out_dir.join(CONFIG_FILE);
        write_json(&stored_config(config), &config_path)?;
        let digest = data_digest(config).map_err(|e| e.at_stage("ingest"))?;
        let mut manifest = Manifest::new(sha256_file(&config_path)?, digest);
        manifest.record_artifact(out_dir, CONFIG_FILE)?;
        Ok(RunContext { config: config.clone(), out_dir: out_dir.to_path_buf(), manifest })
    }

    /// Reopens a run directory produced by `cmd_score` or `cmd_run`,
    /// refusing configs that differ from the recorded one.
    fn resume(config: &RunConfig, out_dir: &Path) -> Result<Self> {
        config.validate()?;
        let config_path = out_dir.join(CONFIG_FILE);
        let stored = crate::pipeline::config::load_run_config(&config_path)?;
        if stored != stored_config(config) {
            return Err(Error::Config(format!(
                "config does not match the one recorded in {}",
                out_dir.display()
            )));
        }
        let manifest = Manifest::load(out_dir)?;
        if manifest.config_digest != sha256_file(&config_path)? {
            return Err(Error::Data("recorded config does not match its manifest hash".into()));
        }
        if manifest.data_digest != data_digest(config)? {
            return Err(Error::Data(
                "dataset changed since the run directory was created".into(),
            ));
        }
        Ok(RunContext { config: config.clone(), out_dir: out_dir.to_path_buf(), manifest })
    }

    fn seed(&mut self, stage: &str, index: u64) -> u64 {
        let seed = derive_seed(self.config.seed, stage, index);
        self.manifest.record_seed(stage, seed);
        seed
    }

    fn record(&mut self, relative: &str) -> Result<()> {
        self.manifest.record_artifact(&self.out_dir, relative)
    }

    /// Ingests the dataset, encodes and normalizes features.
    fn ingest(&self) -> Result<(LabeledDataset, FeatureStats)> {
        let inner = || -> Result<(LabeledDataset, FeatureStats)> {
            let raw = match &self.config.data {
                DataSource::Csv { path, label_column } => load_csv(path, label_column)?.dataset,
                DataSource::Synthetic(spec) => generate_synthetic(spec)?,
            };
            let all_rows: Vec<usize> = (0..raw.n_rows()).collect();
            let stats = FeatureStats::fit(raw.features(), &all_rows)?;
            let dataset = raw.with_features(stats.transform(raw.features())?)?;
            Ok((dataset, stats))
        };
        inner().map_err(|e| e.at_stage("ingest"))
    }

    fn split(&mut self, dataset: &LabeledDataset) -> Result<SixWaySplit> {
        let inner = |ctx: &mut Self| -> Result<SixWaySplit> {
            let spec =
                SplitSpec { sizes: ctx.config.split.clone(), seed: ctx.seed("split", 0) };
            let split = six_way_split(dataset.n_rows(), &spec)?;
            split.save(&ctx.out_dir.join(SPLIT_FILE))?;
            ctx.record(SPLIT_FILE)?;
            Ok(split)
        };
        inner(self).map_err(|e| e.at_stage("split"))
    }

    /// Builds and trains one of the three pipeline models on its rows.
    fn train_model(
        &mut self,
        role: &'static str,
        stage: &'static str,
        spec: &ModelSpec,
        dataset: &LabeledDataset,
        train_rows: &[usize],
        eval_rows: &[usize],
        summaries: &mut BTreeMap<String, TrainSummary>,
    ) -> Result<MlpModel> {
        let mut inner = |ctx: &mut Self| -> Result<MlpModel> {
            let mut sizes = Vec::with_capacity(spec.hidden.len() + 2);
            sizes.push(dataset.n_features());
            sizes.extend_from_slice(&spec.hidden);
            sizes.push(dataset.n_classes());
            let init = MlpModel::init(MlpConfig::new(
                sizes,
                ctx.seed(&format!("{role}-init"), 0),
            ))?;
            let dp = spec.train.dp.as_ref().map(|dp| DpConfig {
                seed: ctx.seed(&format!("{role}-dp"), 0),
                ..dp.clone()
            });
            let train_config = TrainConfig {
                seed: ctx.seed(&format!("{role}-shuffle"), 0),
                dp,
                ..spec.train.clone()
            };
            let (model, history) =
                train(init, dataset.features(), dataset.labels(), train_rows, &train_config)?;
            summaries.insert(
                role.to_string(),
                TrainSummary {
                    final_loss: history.final_loss(),
                    train_accuracy: model.accuracy(
                        dataset.features(),
                        dataset.labels(),
                        train_rows,
                    )?,
                    eval_accuracy: model.accuracy(
                        dataset.features(),
                        dataset.labels(),
                        eval_rows,
                    )?,
                    max_clipped_grad_norm: history.max_clipped_grad_norm,
                },
            );
            let relative = model_file(role);
            save_model(&model, &ctx.out_dir.join(&relative))?;
            ctx.record(&relative)?;
            Ok(model)
        };
        inner(self).map_err(|e| e.at_stage(stage))
    }

    /// Scores both evaluation sets against the reference model and writes
    /// the record tables.
    fn build_score_records(
        &mut self,
        dataset: &LabeledDataset,
        split: &SixWaySplit,
        target: &MlpModel,
        shadow: &MlpModel,
        reference: &MlpModel,
    ) -> Result<(Vec<ScoreRecord>, Vec<ScoreRecord>)> {
        let inner = |ctx: &mut Self| -> Result<(Vec<ScoreRecord>, Vec<ScoreRecord>)> {
            let mut aux_rows = split.shadow_train.clone();
            aux_rows.extend_from_slice(&split.shadow_heldout);
            let aux = AuxEmbeddings::compute(reference, dataset, &aux_rows)?;
            let target_records = build_records(
                target,
                reference,
                dataset,
                &split.target_train,
                &split.test,
                &aux,
                ctx.config.ni_threshold,
            )?;
            let shadow_records = build_records(
                shadow,
                reference,
                dataset,
                &split.shadow_train,
                &split.shadow_heldout,
                &aux,
                ctx.config.ni_threshold,
            )?;
            save_records(&target_records, &ctx.out_dir.join(TARGET_RECORDS_FILE))?;
            save_records(&shadow_records, &ctx.out_dir.join(SHADOW_RECORDS_FILE))?;
            ctx.record(TARGET_RECORDS_FILE)?;
            ctx.record(SHADOW_RECORDS_FILE)?;
            Ok((target_records, shadow_records))
        };
        inner(self).map_err(|e| e.at_stage("records"))
    }

    /// Ingest through score records; everything the attacks consume.
    fn score_stages(&mut self) -> Result<ScoredRun> {
        let (dataset, stats) = self.ingest()?;
        write_json(&stats, &self.out_dir.join(NORMALIZATION_FILE))?;
        self.record(NORMALIZATION_FILE)?;
        let split = self.split(&dataset)?;
        let mut summaries = BTreeMap::new();
        let target = self.train_model(
            "target",
            "train-target",
            &self.config.target.clone(),
            &dataset,
            &split.target_train,
            &split.test,
            &mut summaries,
        )?;
        let shadow = self.train_model(
            "shadow",
            "train-shadow",
            &self.config.shadow_spec().clone(),
            &dataset,
            &split.shadow_train,
            &split.shadow_heldout,
            &mut summaries,
        )?;
        let reference = self.train_model(
            "reference",
            "train-reference",
            &self.config.reference_spec().clone(),
            &dataset,
            &split.ref_train,
            &split.test,
            &mut summaries,
        )?;
        write_json(&summaries, &self.out_dir.join(TRAINING_FILE))?;
        self.record(TRAINING_FILE)?;
        let (target_records, shadow_records) =
            self.build_score_records(&dataset, &split, &target, &shadow, &reference)?;
        Ok(ScoredRun { dataset, split, target, shadow, reference, target_records, shadow_records })
    }

    /// Reloads the outputs of `score_stages` from a run directory.
    fn reload_scored(&self) -> Result<ScoredRun> {
        let inner = || -> Result<ScoredRun> {
            let raw = match &self.config.data {
                DataSource::Csv { path, label_column } => load_csv(path, label_column)?.dataset,
                DataSource::Synthetic(spec) => generate_synthetic(spec)?,
            };
            let stats_path = self.out_dir.join(NORMALIZATION_FILE);
            let text =
                std::fs::read_to_string(&stats_path).map_err(|e| Error::io(&stats_path, e))?;
            let stats: FeatureStats = serde_json::from_str(&text)
                .map_err(|e| Error::Data(format!("{}: {e}", stats_path.display())))?;
            let dataset = raw.with_features(stats.transform(raw.features())?)?;
            let split = SixWaySplit::load(&self.out_dir.join(SPLIT_FILE), dataset.n_rows())?;
            let target = load_model(&self.out_dir.join(model_file("target")))?;
            let shadow = load_model(&self.out_dir.join(model_file("shadow")))?;
            let reference = load_model(&self.out_dir.join(model_file("reference")))?;
            let target_records = load_records(&self.out_dir.join(TARGET_RECORDS_FILE))?;
            let shadow_records = load_records(&self.out_dir.join(SHADOW_RECORDS_FILE))?;
            Ok(ScoredRun {
                dataset,
                split,
                target,
                shadow,
                reference,
                target_records,
                shadow_records,
            })
        };
        inner().map_err(|e| e.at_stage("resume"))
    }

    /// Balanced, seeded subsample of the evaluation rows for the
    /// likelihood-ratio attack. Each side keeps at least one row and at
    /// most half the cap.
    fn lira_targets(&mut self, split: &SixWaySplit) -> (Vec<usize>, Vec<usize>) {
        let members = &split.target_train;
        let nonmembers = &split.test;
        let Some(cap) = self.config.lira_max_targets else {
            return (members.clone(), nonmembers.clone());
        };
        if members.len() + nonmembers.len() <= cap {
            return (members.clone(), nonmembers.clone());
        }
        let per_side = (cap / 2).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed("lira-targets", 0));
        let mut pick = |rows: &[usize]| -> Vec<usize> {
            let mut rows = rows.to_vec();
            rows.shuffle(&mut rng);
            rows.truncate(per_side);
            rows.sort_unstable();
            rows
        };
        let member_sample = pick(members);
        let nonmember_sample = pick(nonmembers);
        (member_sample, nonmember_sample)
    }

    fn run_attack(&mut self, kind: AttackKind, scored: &ScoredRun) -> Result<AttackOutput> {
        match kind {
            AttackKind::Yeom => yeom_attack(&scored.target_records),
            AttackKind::Watson => watson_attack(&scored.target_records),
            AttackKind::Salem => {
                let config =
                    SalemConfig { seed: self.seed("salem", 0), ..self.config.salem.clone() };
                let attack = SalemAttack::fit(
                    &scored.shadow,
                    &scored.dataset,
                    &scored.split.shadow_train,
                    &scored.split.shadow_heldout,
                    &config,
                )?;
                attack.attack(
                    &scored.target,
                    &scored.dataset,
                    &scored.split.target_train,
                    &scored.split.test,
                )
            }
            AttackKind::Ldc => {
                let config =
                    LdcConfig { seed: self.seed("ldc", 0), ..self.config.ldc.clone() };
                let classifier = LdcClassifier::fit(
                    &scored.shadow_records,
                    scored.dataset.n_classes(),
                    &config,
                )?;
                classifier.attack(&scored.target_records)
            }
            AttackKind::Lira => {
                let config =
                    LiraConfig { seed: self.seed("lira", 0), ..self.config.lira.clone() };
                let (members, nonmembers) = self.lira_targets(&scored.split);
                // The shadow pool is every attacker-held row.
                let mut pool = scored.split.shadow_train.clone();
                pool.extend_from_slice(&scored.split.shadow_heldout);
                pool.extend_from_slice(&scored.split.ref_train);
                let mut sizes = Vec::with_capacity(self.config.target.hidden.len() + 2);
                sizes.push(scored.dataset.n_features());
                sizes.extend_from_slice(&self.config.target.hidden);
                sizes.push(scored.dataset.n_classes());
                let arch = MlpConfig::new(sizes, 0);
                lira_lite(
                    &scored.dataset,
                    &scored.target,
                    &members,
                    &nonmembers,
                    &pool,
                    &arch,
                    &config,
                )
            }
        }
    }

    /// Runs every configured attack, evaluates it, and writes the report.
    fn attack_stages(&mut self, scored: &ScoredRun) -> Result<Vec<MetricsReport>> {
        let mut rows = Vec::new();
        for &kind in &self.config.attacks.clone() {
            let stage: &'static str = match kind {
                AttackKind::Yeom => "attack-yeom",
                AttackKind::Salem => "attack-salem",
                AttackKind::Watson => "attack-watson",
                AttackKind::Ldc => "attack-ldc",
                AttackKind::Lira => "attack-lira",
            };
            let mut inner = |ctx: &mut Self| -> Result<()> {
                let output = ctx.run_attack(kind, scored)?;
                let relative = attack_file(kind.name());
                output.save(&ctx.out_dir.join(&relative))?;
                ctx.record(&relative)?;
                let row = compute_metrics(&output, &ctx.config.fpr_targets)?;
                let relative = metrics_file(kind.name());
                save_metrics_report(&row.0, &ctx.out_dir.join(&relative))?;
                ctx.record(&relative)?;
                rows.push(row);
                Ok(())
            };
            inner(self).map_err(|e| e.at_stage(stage))?;
        }
        write_report_files(&rows, &self.config.fpr_targets, &self.out_dir.join("report"))
            .map_err(|e| e.at_stage("report"))?;
        Ok(rows.into_iter().map(|(r, _, _)| r).collect())
    }

    fn finish(&self) -> Result<()> {
        self.manifest.save(&self.out_dir).map_err(|e| e.at_stage("manifest"))
    }
}

/// Full pipeline into `out_dir`; returns the per-attack evaluation rows.
pub fn cmd_run(config: &RunConfig, out_dir: &Path) -> Result<Vec<MetricsReport>> {
    let mut ctx = RunContext::create(config, out_dir)?;
    let scored = ctx.score_stages()?;
    let rows = ctx.attack_stages(&scored)?;
    ctx.finish()?;
    Ok(rows)
}

/// Scoring stages only: models and score-record tables, no attacks.
pub fn cmd_score(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut ctx = RunContext::create(config, out_dir)?;
    ctx.score_stages()?;
    ctx.finish()
}

/// Attack and evaluation stages on top of an existing scored run
/// directory. The config must match the recorded one byte for byte.
pub fn cmd_attack(config: &RunConfig, out_dir: &Path) -> Result<Vec<MetricsReport>> {
    let mut ctx = RunContext::resume(config, out_dir)?;
    let scored = ctx.reload_scored()?;
    let rows = ctx.attack_stages(&scored)?;
    ctx.finish()?;
    Ok(rows)
}

//! Per-sample likelihood-ratio attack with a small shadow-model ensemble.
//!
//! For each candidate sample the attacker trains `n_shadow` models on random
//! halves of an auxiliary pool; half of them additionally include the
//! candidate. The candidate's logit-transformed confidence under each model
//! gives two empirical distributions, one "in" and one "out", each fit with
//! a Gaussian. The membership score is the log-likelihood ratio of the
//! target model's logit under those two fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::AttackOutput;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::nn::mlp::PROB_FLOOR;
use crate::nn::{train, MlpConfig, MlpModel, TrainConfig};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiraConfig {
    /// Shadow models per candidate; must be even, half in and half out.
    pub n_shadow: usize,
    /// Lower bound on fitted variances, guarding against degenerate
    /// single-point or collapsed distributions.
    pub variance_floor: f64,
    /// Training recipe for shadow models; seeds are derived per model.
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for LiraConfig {
    fn default() -> Self {
        LiraConfig {
            n_shadow: 8,
            variance_floor: 1e-8,
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

impl LiraConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_shadow < 2 || self.n_shadow % 2 != 0 {
            return Err(Error::Config(format!(
                "n_shadow must be even and at least 2, got {}",
                self.n_shadow
            )));
        }
        if !(self.variance_floor > 0.0) {
            return Err(Error::Config(format!(
                "variance floor must be positive, got {}",
                self.variance_floor
            )));
        }
        self.train.validate()
    }
}

/// Log-odds of a probability, clamped away from 0 and 1 so the result is
/// always finite.
pub fn logit_transform(p: f64) -> f64 {
    let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    (p / (1.0 - p)).ln()
}

/// Gaussian fitted by moments with a variance floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub var: f64,
}

impl GaussianFit {
    pub fn fit(samples: &[f64], variance_floor: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("cannot fit a Gaussian to zero samples".into()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Ok(GaussianFit { mean, var: var.max(variance_floor) })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * (2.0 * std::f64::consts::PI * self.var).ln() - d * d / (2.0 * self.var)
    }
}

/// `log p(x | in) - log p(x | out)`.
pub fn gaussian_log_likelihood_ratio(x: f64, in_fit: &GaussianFit, out_fit: &GaussianFit) -> f64 {
    in_fit.log_pdf(x) - out_fit.log_pdf(x)
}

/// Runs the likelihood-ratio attack over an evaluation set.
///
/// `shadow_pool` lists the rows the attacker may train shadows on; the
/// candidate itself is always removed from the pool draw and re-added only
/// for the "in" half of the ensemble. `arch` fixes the shadow architecture;
/// its seed field is ignored in favor of per-model derived seeds. The whole
/// procedure is a pure function of the inputs and `config.seed`.
pub fn lira_lite(
    dataset: &LabeledDataset,
    target_model: &MlpModel,
    member_ids: &[usize],
    nonmember_ids: &[usize],
    shadow_pool: &[usize],
    arch: &MlpConfig,
    config: &LiraConfig,
) -> Result<AttackOutput> {
    config.validate()?;
    if member_ids.is_empty() || nonmember_ids.is_empty() {
        return Err(Error::Data("lira needs members and non-members to score".into()));
    }
    if shadow_pool.len() < 2 {
        return Err(Error::Data(format!(
            "shadow pool of {} rows is too small",
            shadow_pool.len()
        )));
    }
    for &i in member_ids.iter().chain(nonmember_ids).chain(shadow_pool) {
        if i >= dataset.n_rows() {
            return Err(Error::Shape(format!("row {i} out of bounds")));
        }
    }

    let candidates: Vec<(usize, bool)> = member_ids
        .iter()
        .map(|&i| (i, true))
        .chain(nonmember_ids.iter().map(|&i| (i, false)))
        .collect();

    let scores: Vec<f64> = candidates
        .par_iter()
        .enumerate()
        .map(|(k, &(id, _))| score_candidate(dataset, target_model, id, k, shadow_pool, arch, config))
        .collect::<Result<_>>()?;

    AttackOutput::new(
        "lira",
        candidates.iter().map(|&(id, _)| id).collect(),
        scores,
        candidates.iter().map(|&(_, m)| m).collect(),
    )
}

fn score_candidate(
    dataset: &LabeledDataset,
    target_model: &MlpModel,
    id: usize,
    candidate_index: usize,
    shadow_pool: &[usize],
    arch: &MlpConfig,
    config: &LiraConfig,
) -> Result<f64> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let x = dataset.row(id);
    let y = dataset.label(id);
    let half_models = config.n_shadow / 2;
    let mut in_logits = Vec::with_capacity(half_models);
    let mut out_logits = Vec::with_capacity(half_models);

    for m in 0..config.n_shadow {
        let stream = (candidate_index * config.n_shadow + m) as u64;
        let mut pool: Vec<usize> = shadow_pool.iter().copied().filter(|&p| p != id).collect();
        let mut pool_rng =
            rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "lira-pool", stream));
        pool.shuffle(&mut pool_rng);
        pool.truncate(pool.len() / 2);
        let is_in_model = m < half_models;
        if is_in_model {
            pool.push(id);
        }

        let model = MlpModel::init(MlpConfig {
            seed: derive_seed(config.seed, "lira-init", stream),
            ..arch.clone()
        })?;
        let train_cfg = TrainConfig {
            seed: derive_seed(config.seed, "lira-shuffle", stream),
            ..config.train.clone()
        };
        let (shadow, _) = train(model, dataset.features(), dataset.labels(), &pool, &train_cfg)?;
        let phi = logit_transform(shadow.predict_proba(x)?[y]);
        if is_in_model {
            in_logits.push(phi);
        } else {
            out_logits.push(phi);
        }
    }

    let in_fit = GaussianFit::fit(&in_logits, config.variance_floor)?;
    let out_fit = GaussianFit::fit(&out_logits, config.variance_floor)?;
    let phi_target = logit_transform(target_model.predict_proba(x)?[y]);
    Ok(gaussian_log_likelihood_ratio(phi_target, &in_fit, &out_fit))
}

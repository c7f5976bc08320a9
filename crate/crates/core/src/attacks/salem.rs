//! Shadow-model attack on the target's posterior vector.
//!
//! A binary meta-classifier learns to tell members from non-members using
//! only the three largest posterior probabilities, sorted descending.
//! Ground truth for its training comes from a shadow model whose training
//! set the attacker controls; at inference the same features are read off
//! the target model.

use serde::{Deserialize, Serialize};

use crate::attacks::AttackOutput;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{train, MlpConfig, MlpModel, TrainConfig};
use crate::seeds::derive_seed;

/// Input width of the meta-classifier: top-3 posteriors, zero-padded when
/// the task has fewer classes.
pub const SALEM_FEATURE_WIDTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SalemConfig {
    /// Hidden widths of the meta-classifier.
    pub hidden: Vec<usize>,
    /// Training recipe for the meta-classifier; its seeds are derived from
    /// `seed` below, not taken from this template.
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for SalemConfig {
    fn default() -> Self {
        SalemConfig { hidden: vec![32], train: TrainConfig::default(), seed: 0 }
    }
}

/// Sorted top-3 posterior probabilities of `model` on `x`, padded with
/// zeros for tasks with fewer than three classes.
pub fn salem_features(model: &MlpModel, x: &[f64]) -> Result<Vec<f64>> {
    let mut probs = model.predict_proba(x)?;
    probs.sort_by(|a, b| b.partial_cmp(a).expect("probabilities are finite"));
    probs.truncate(SALEM_FEATURE_WIDTH);
    probs.resize(SALEM_FEATURE_WIDTH, 0.0);
    Ok(probs)
}

/// Fitted meta-classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SalemAttack {
    model: MlpModel,
}

impl SalemAttack {
    /// Trains the meta-classifier on shadow-model posteriors: members of the
    /// shadow training set are class 1, held-out samples class 0.
    pub fn fit(
        shadow_model: &MlpModel,
        dataset: &LabeledDataset,
        member_ids: &[usize],
        nonmember_ids: &[usize],
        config: &SalemConfig,
    ) -> Result<Self> {
        if member_ids.is_empty() || nonmember_ids.is_empty() {
            return Err(Error::Data("salem needs members and non-members to fit".into()));
        }
        let mut data = Vec::with_capacity((member_ids.len() + nonmember_ids.len()) * 3);
        let mut labels = Vec::new();
        for (ids, class) in [(member_ids, 1usize), (nonmember_ids, 0usize)] {
            for &i in ids {
                data.extend(salem_features(shadow_model, dataset.row(i))?);
                labels.push(class);
            }
        }
        let features = Matrix::from_vec(labels.len(), SALEM_FEATURE_WIDTH, data)?;
        let mut sizes = vec![SALEM_FEATURE_WIDTH];
        sizes.extend(&config.hidden);
        sizes.push(2);
        let meta = MlpModel::init(MlpConfig::new(sizes, derive_seed(config.seed, "salem-init", 0)))?;
        let train_cfg = TrainConfig {
            seed: derive_seed(config.seed, "salem-shuffle", 0),
            ..config.train.clone()
        };
        let indices: Vec<usize> = (0..labels.len()).collect();
        let (model, _) = train(meta, &features, &labels, &indices, &train_cfg)?;
        Ok(SalemAttack { model })
    }

    /// Probability the meta-classifier assigns to membership for one sample
    /// under the attacked model.
    pub fn score_sample(&self, attacked_model: &MlpModel, x: &[f64]) -> Result<f64> {
        let features = salem_features(attacked_model, x)?;
        Ok(self.model.predict_proba(&features)?[1])
    }

    /// Scores an evaluation set against the attacked model.
    pub fn attack(
        &self,
        attacked_model: &MlpModel,
        dataset: &LabeledDataset,
        member_ids: &[usize],
        nonmember_ids: &[usize],
    ) -> Result<AttackOutput> {
        let mut sample_ids = Vec::with_capacity(member_ids.len() + nonmember_ids.len());
        let mut scores = Vec::with_capacity(sample_ids.capacity());
        let mut truth = Vec::with_capacity(sample_ids.capacity());
        for (ids, is_member) in [(member_ids, true), (nonmember_ids, false)] {
            for &i in ids {
                sample_ids.push(i);
                scores.push(self.score_sample(attacked_model, dataset.row(i))?);
                truth.push(is_member);
            }
        }
        AttackOutput::new("salem", sample_ids, scores, truth)
    }
}

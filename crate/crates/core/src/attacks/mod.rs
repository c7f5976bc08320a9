//! Membership-inference attacks. Each one maps samples to real-valued
//! scores where higher means more member-like; thresholds and curves live
//! in [`crate::metrics`].
//!
//! The five attacks, weakest assumptions first:
//! - `yeom`: threshold the target model's loss on the sample.
//! - `salem`: binary classifier on the target model's top posteriors,
//!   trained against a shadow model.
//! - `watson`: threshold the difficulty-calibrated score.
//! - `ldc`: classifier over calibrated difficulty features ([`ldc`]).
//! - `lira`: per-sample likelihood ratio from shadow-model score
//!   distributions ([`lira`]).

pub mod ldc;
pub mod lira;
pub mod salem;
pub mod simple;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ldc::{LdcClassifier, LdcConfig, LdcFeatures};
pub use lira::{lira_lite, logit_transform, GaussianFit, LiraConfig};
pub use salem::{salem_features, SalemAttack, SalemConfig, SALEM_FEATURE_WIDTH};
pub use simple::{watson_attack, yeom_attack};

/// Scores produced by one attack over one evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutput {
    /// Attack identifier, e.g. `"yeom"` or `"ldc"`.
    pub attack: String,
    pub sample_ids: Vec<usize>,
    /// Higher means the attack believes the sample was a training member.
    pub scores: Vec<f64>,
    pub ground_truth: Vec<bool>,
}

impl AttackOutput {
    pub fn new(
        attack: impl Into<String>,
        sample_ids: Vec<usize>,
        scores: Vec<f64>,
        ground_truth: Vec<bool>,
    ) -> Result<Self> {
        if sample_ids.len() != scores.len() || scores.len() != ground_truth.len() {
            return Err(Error::Shape(format!(
                "attack output lengths disagree: {} ids, {} scores, {} truths",
                sample_ids.len(),
                scores.len(),
                ground_truth.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Data("attack produced a non-finite score".into()));
        }
        Ok(AttackOutput { attack: attack.into(), sample_ids, scores, ground_truth })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Report(format!("cannot encode attack output: {e}")))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let out: AttackOutput = serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("bad attack file {}: {e}", path.display())))?;
        AttackOutput::new(out.attack, out.sample_ids, out.scores, out.ground_truth)
    }
}

//! Differentially private gradient computation: per-example clipping to an
//! L2 bound followed by Gaussian noise on the averaged gradient.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::backprop::{backward, Gradients};
use crate::nn::mlp::MlpModel;

/// Settings for DP-SGD. Noise draws come from a dedicated stream seeded with
/// `seed`, independent of initialization and shuffling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    /// Per-example gradient L2 bound, `C`.
    pub clip_bound: f64,
    /// Noise multiplier `sigma`; the averaged gradient receives noise with
    /// standard deviation `sigma * C / batch_size` per coordinate.
    pub noise_multiplier: f64,
    pub seed: u64,
}

impl DpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_bound > 0.0) {
            return Err(Error::Config(format!(
                "clip bound must be positive, got {}",
                self.clip_bound
            )));
        }
        if !(self.noise_multiplier >= 0.0) {
            return Err(Error::Config(format!(
                "noise multiplier must be nonnegative, got {}",
                self.noise_multiplier
            )));
        }
        Ok(())
    }
}

/// Privatized batch gradient plus the statistics of the pass.
#[derive(Debug)]
pub struct DpBackwardOutput {
    pub grads: Gradients,
    pub mean_loss: f64,
    pub correct: usize,
    /// Largest per-example gradient norm observed after clipping.
    pub max_clipped_norm: f64,
}

/// Computes the DP-SGD gradient for one batch: each example's gradient is
/// scaled to L2 norm at most `clip_bound`, the clipped gradients are
/// averaged, and spherical Gaussian noise is added. Noise is drawn in a fixed
/// order (all weight layers, then all bias layers, each row-major), so equal
/// seeds reproduce equal gradients.
pub fn dp_sgd_gradient(
    model: &MlpModel,
    features: &Matrix,
    labels: &[usize],
    batch: &[usize],
    config: &DpConfig,
    noise_rng: &mut ChaCha8Rng,
) -> Result<DpBackwardOutput> {
    config.validate()?;
    if batch.is_empty() {
        return Err(Error::Training("empty batch".into()));
    }
    let mut acc = Gradients::zeros_like(model);
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    let mut max_clipped_norm = 0.0f64;
    let inv = 1.0 / batch.len() as f64;

    for &i in batch {
        let out = backward(model, features, labels, &[i])?;
        let norm = out.grads.l2_norm();
        let scale = if norm > config.clip_bound { config.clip_bound / norm } else { 1.0 };
        // Clipping bounds the norm at exactly min(norm, C). The rounded
        // product norm * scale can land an ulp above C, so it is checked
        // with a tolerance but never recorded.
        let clipped_norm = norm.min(config.clip_bound);
        assert!(
            norm * scale <= config.clip_bound * (1.0 + 1e-12),
            "clipped norm {} exceeds bound {}",
            norm * scale,
            config.clip_bound
        );
        max_clipped_norm = max_clipped_norm.max(clipped_norm);
        acc.add_scaled(&out.grads, scale * inv);
        total_loss += out.mean_loss;
        correct += out.correct;
    }

    let noise_std = config.noise_multiplier * config.clip_bound * inv;
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std)
            .map_err(|e| Error::Config(format!("invalid noise distribution: {e}")))?;
        for w in &mut acc.weights {
            for v in w.data_mut() {
                *v += normal.sample(noise_rng);
            }
        }
        for b in &mut acc.biases {
            for v in b {
                *v += normal.sample(noise_rng);
            }
        }
    }

    Ok(DpBackwardOutput {
        grads: acc,
        mean_loss: total_loss * inv,
        correct,
        max_clipped_norm,
    })
}

//! Mini-batch training loop with seeded shuffling and optional DP-SGD.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::backprop::backward;
use crate::nn::dp::{dp_sgd_gradient, DpConfig};
use crate::nn::mlp::MlpModel;
use crate::nn::optim::{learning_rate, optimizer_step, LrSchedule, Optimizer, OptimizerState};

/// Hyperparameters for [`train`]. `seed` drives only the epoch shuffles;
/// weight initialization and DP noise have their own seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub optimizer: Optimizer,
    pub momentum: f64,
    pub nesterov: bool,
    pub lr_schedule: LrSchedule,
    pub seed: u64,
    #[serde(default)]
    pub dp: Option<DpConfig>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 32,
            base_lr: 0.1,
            optimizer: Optimizer::Sgdm,
            momentum: 0.9,
            nesterov: true,
            lr_schedule: LrSchedule::Cosine,
            seed: 0,
            dp: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return Err(Error::Config(format!(
                "base learning rate must be positive, got {}",
                self.base_lr
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if let Some(dp) = &self.dp {
            dp.validate()?;
        }
        Ok(())
    }
}

/// Running training loss and accuracy for one epoch, measured on the
/// forward passes made during that epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// Largest per-example clipped gradient norm seen during DP training;
    /// absent when DP is off.
    pub max_clipped_grad_norm: Option<f64>,
}

impl TrainHistory {
    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map(|e| e.mean_loss).unwrap_or(f64::NAN)
    }

    pub fn final_accuracy(&self) -> f64 {
        self.epochs.last().map(|e| e.accuracy).unwrap_or(f64::NAN)
    }
}

/// Trains `model` on the rows of `features` selected by `indices`.
///
/// Each epoch reshuffles the index order with a ChaCha stream seeded from
/// `config.seed` and walks it in batches of `config.batch_size`; the last
/// batch may be short. The step counter feeding the learning-rate schedule
/// runs over `epochs * ceil(n / batch_size)` total steps.
pub fn train(
    mut model: MlpModel,
    features: &Matrix,
    labels: &[usize],
    indices: &[usize],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainHistory)> {
    config.validate()?;
    if indices.is_empty() {
        return Err(Error::Training("no training rows selected".into()));
    }
    let n = indices.len();
    let n_batches = n.div_ceil(config.batch_size);
    let total_steps = (config.epochs * n_batches) as u64;

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut noise_rng = config.dp.as_ref().map(|dp| ChaCha8Rng::seed_from_u64(dp.seed));
    let mut state =
        OptimizerState::new(config.optimizer, config.momentum, config.nesterov, &model);
    let mut order = indices.to_vec();
    let mut history = TrainHistory {
        epochs: Vec::with_capacity(config.epochs),
        max_clipped_grad_norm: config.dp.as_ref().map(|_| 0.0),
    };

    let mut step = 0u64;
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let lr = learning_rate(config.base_lr, config.lr_schedule, step, total_steps);
            let grads = match (&config.dp, &mut noise_rng) {
                (Some(dp), Some(rng)) => {
                    let out = dp_sgd_gradient(&model, features, labels, chunk, dp, rng)?;
                    loss_sum += out.mean_loss * chunk.len() as f64;
                    correct += out.correct;
                    if let Some(max) = &mut history.max_clipped_grad_norm {
                        *max = max.max(out.max_clipped_norm);
                    }
                    out.grads
                }
                _ => {
                    let out = backward(&model, features, labels, chunk)?;
                    loss_sum += out.mean_loss * chunk.len() as f64;
                    correct += out.correct;
                    out.grads
                }
            };
            optimizer_step(&mut model, &mut state, &grads, lr);
            step += 1;
        }
        history.epochs.push(EpochStats {
            mean_loss: loss_sum / n as f64,
            accuracy: correct as f64 / n as f64,
        });
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::MlpConfig;
    use rand_distr::{Distribution, Normal};

    /// Two Gaussian blobs at (-2, -2) and (2, 2).
    fn blobs(n_per_class: usize, seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.7).unwrap();
        let mut data = Vec::with_capacity(n_per_class * 4);
        let mut labels = Vec::with_capacity(n_per_class * 2);
        for i in 0..n_per_class * 2 {
            let class = i % 2;
            let center = if class == 0 { -2.0 } else { 2.0 };
            data.push(center + noise.sample(&mut rng));
            data.push(center + noise.sample(&mut rng));
            labels.push(class);
        }
        (Matrix::from_vec(n_per_class * 2, 2, data).unwrap(), labels)
    }

    fn quick_config(optimizer: Optimizer) -> TrainConfig {
        TrainConfig {
            epochs: 30,
            batch_size: 16,
            base_lr: if optimizer == Optimizer::Adam { 0.01 } else { 0.1 },
            optimizer,
            momentum: 0.9,
            nesterov: true,
            lr_schedule: LrSchedule::Cosine,
            seed: 5,
            dp: None,
        }
    }

    #[test]
    fn learns_separable_blobs_with_every_optimizer() {
        let (features, labels) = blobs(60, 17);
        let indices: Vec<usize> = (0..features.rows()).collect();
        for optimizer in [Optimizer::Sgd, Optimizer::Sgdm, Optimizer::Adam] {
            let model = MlpModel::init(MlpConfig::new(vec![2, 8, 2], 1)).unwrap();
            let initial = crate::nn::backprop::batch_loss(&model, &features, &labels, &indices)
                .unwrap();
            let (trained, history) =
                train(model, &features, &labels, &indices, &quick_config(optimizer)).unwrap();
            let acc = trained.accuracy(&features, &labels, &indices).unwrap();
            assert!(acc >= 0.95, "{optimizer:?} reached only {acc}");
            assert!(history.final_loss() < initial, "{optimizer:?} did not reduce loss");
            assert!(history.max_clipped_grad_norm.is_none());
            assert_eq!(history.epochs.len(), 30);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (features, labels) = blobs(30, 2);
        let indices: Vec<usize> = (0..features.rows()).collect();
        let config = quick_config(Optimizer::Sgdm);
        let run = |cfg: &TrainConfig| {
            let model = MlpModel::init(MlpConfig::new(vec![2, 6, 2], 4)).unwrap();
            train(model, &features, &labels, &indices, cfg).unwrap().0
        };
        assert_eq!(run(&config), run(&config));
        let other = TrainConfig { seed: 6, ..config.clone() };
        assert_ne!(run(&config), run(&other));
    }

    #[test]
    fn dp_training_tracks_clip_norm() {
        let (features, labels) = blobs(30, 9);
        let indices: Vec<usize> = (0..features.rows()).collect();
        let bound = 0.5;
        let config = TrainConfig {
            epochs: 3,
            dp: Some(DpConfig { clip_bound: bound, noise_multiplier: 0.8, seed: 13 }),
            ..quick_config(Optimizer::Sgdm)
        };
        let model = MlpModel::init(MlpConfig::new(vec![2, 6, 2], 4)).unwrap();
        let (_, history) = train(model, &features, &labels, &indices, &config).unwrap();
        let max = history.max_clipped_grad_norm.expect("dp run records the norm");
        assert!(max > 0.0 && max <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn dp_noise_seed_changes_outcome() {
        let (features, labels) = blobs(20, 3);
        let indices: Vec<usize> = (0..features.rows()).collect();
        let mk = |noise_seed: u64| TrainConfig {
            epochs: 2,
            dp: Some(DpConfig { clip_bound: 1.0, noise_multiplier: 1.0, seed: noise_seed }),
            ..quick_config(Optimizer::Sgd)
        };
        let run = |cfg: TrainConfig| {
            let model = MlpModel::init(MlpConfig::new(vec![2, 4, 2], 0)).unwrap();
            train(model, &features, &labels, &indices, &cfg).unwrap().0
        };
        assert_eq!(run(mk(1)), run(mk(1)));
        assert_ne!(run(mk(1)), run(mk(2)));
    }

    #[test]
    fn rejects_invalid_configs_and_empty_selections() {
        let (features, labels) = blobs(5, 0);
        let model = MlpModel::init(MlpConfig::new(vec![2, 2], 0)).unwrap();
        let bad_epochs = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(train(model.clone(), &features, &labels, &[0], &bad_epochs).is_err());
        let bad_momentum = TrainConfig { momentum: 1.0, ..TrainConfig::default() };
        assert!(bad_momentum.validate().is_err());
        let bad_lr = TrainConfig { base_lr: 0.0, ..TrainConfig::default() };
        assert!(bad_lr.validate().is_err());
        assert!(train(model, &features, &labels, &[], &TrainConfig::default()).is_err());
    }

    /// A short batch at the end must not break step accounting.
    #[test]
    fn handles_ragged_final_batch() {
        let (features, labels) = blobs(13, 1);
        let indices: Vec<usize> = (0..features.rows()).collect();
        let config = TrainConfig { batch_size: 8, epochs: 4, ..quick_config(Optimizer::Sgd) };
        let model = MlpModel::init(MlpConfig::new(vec![2, 4, 2], 2)).unwrap();
        let (_, history) = train(model, &features, &labels, &indices, &config).unwrap();
        assert_eq!(history.epochs.len(), 4);
        assert!(history.epochs.iter().all(|e| e.mean_loss.is_finite()));
    }

    #[test]
    fn subset_training_ignores_other_rows() {
        let (features, labels) = blobs(20, 8);
        let subset: Vec<usize> = (0..10).collect();
        let config = quick_config(Optimizer::Sgd);
        let model = MlpModel::init(MlpConfig::new(vec![2, 4, 2], 2)).unwrap();

        // Corrupting rows outside the subset must not change the result.
        let (trained_a, _) =
            train(model.clone(), &features, &labels, &subset, &config).unwrap();
        let mut corrupted = features.clone();
        for r in 10..corrupted.rows() {
            for v in corrupted.row_mut(r) {
                *v = 1234.5;
            }
        }
        let (trained_b, _) = train(model, &corrupted, &labels, &subset, &config).unwrap();
        assert_eq!(trained_a, trained_b);
    }
}

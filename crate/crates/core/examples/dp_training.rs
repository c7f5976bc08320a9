//! Trains the same model with and without differentially private SGD and
//! shows the accuracy cost of clipping and noise.
//!
//! Per-example gradients are clipped to `clip_bound` before averaging and
//! Gaussian noise with scale `noise_multiplier * clip_bound / batch` is added
//! to the mean. The largest clipped norm is tracked so the clipping invariant
//! can be checked after the fact.
//!
//! ```sh
//! cargo run --example dp_training
//! ```

use mia_audit::data::{generate_synthetic, FeatureStats, SyntheticSpec};
use mia_audit::nn::{train, DpConfig, MlpConfig, MlpModel, TrainConfig};

fn main() -> mia_audit::Result<()> {
    let dataset = generate_synthetic(&SyntheticSpec {
        n_samples: 600,
        n_features: 8,
        n_classes: 4,
        separation: 2.5,
        noise_std: 1.0,
        seed: 7,
    })?;
    let train_rows: Vec<usize> = (0..500).collect();
    let eval_rows: Vec<usize> = (500..dataset.n_rows()).collect();
    let stats = FeatureStats::fit(dataset.features(), &train_rows)?;
    let dataset = dataset.with_features(stats.transform(dataset.features())?)?;

    let clip_bound = 1.0;
    println!("noise  train_acc  heldout_acc  max_clipped_norm");
    for noise_multiplier in [f64::NAN, 0.0, 0.5, 1.0, 2.0] {
        let dp = if noise_multiplier.is_nan() {
            None
        } else {
            Some(DpConfig { clip_bound, noise_multiplier, seed: 3 })
        };
        let config = TrainConfig { epochs: 40, seed: 2, dp, ..TrainConfig::default() };

        let model = MlpModel::init(MlpConfig::new(vec![8, 32, 16, 4], 1))?;
        let (model, history) =
            train(model, dataset.features(), dataset.labels(), &train_rows, &config)?;

        let label = if noise_multiplier.is_nan() {
            "off".to_string()
        } else {
            format!("{noise_multiplier:.1}")
        };
        let max_norm = history
            .max_clipped_grad_norm
            .map(|n| format!("{n:.4}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{label:>5}  {:>9.3}  {:>11.3}  {max_norm:>16}",
            model.accuracy(dataset.features(), dataset.labels(), &train_rows)?,
            model.accuracy(dataset.features(), dataset.labels(), &eval_rows)?,
        );
    }
    println!("\nevery clipped per-example norm stays at or below the bound {clip_bound}");
    Ok(())
}

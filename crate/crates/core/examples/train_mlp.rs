//! Trains a small MLP from scratch on a synthetic Gaussian-blob task and
//! reports train and held-out accuracy.
//!
//! ```sh
//! cargo run --example train_mlp
//! ```

use mia_audit::data::{generate_synthetic, FeatureStats, SyntheticSpec};
use mia_audit::nn::{train, LrSchedule, MlpConfig, MlpModel, Optimizer, TrainConfig};

fn main() -> mia_audit::Result<()> {
    let dataset = generate_synthetic(&SyntheticSpec {
        n_samples: 600,
        n_features: 8,
        n_classes: 4,
        separation: 2.5,
        noise_std: 1.0,
        seed: 7,
    })?;

    // Standardize features, then hold out the last 100 rows for evaluation.
    let train_rows: Vec<usize> = (0..500).collect();
    let eval_rows: Vec<usize> = (500..dataset.n_rows()).collect();
    let stats = FeatureStats::fit(dataset.features(), &train_rows)?;
    let dataset = dataset.with_features(stats.transform(dataset.features())?)?;

    let model = MlpModel::init(MlpConfig::new(vec![8, 32, 16, 4], 1))?;
    println!("model: {} parameters", model.n_parameters());

    let config = TrainConfig {
        epochs: 40,
        batch_size: 32,
        base_lr: 0.1,
        optimizer: Optimizer::Sgdm,
        momentum: 0.9,
        nesterov: true,
        lr_schedule: LrSchedule::Cosine,
        seed: 2,
        dp: None,
    };
    let (model, history) = train(model, dataset.features(), dataset.labels(), &train_rows, &config)?;

    for (epoch, stats) in history.epochs.iter().enumerate().step_by(10) {
        println!(
            "epoch {epoch:>3}: loss {:.4}, train accuracy {:.3}",
            stats.mean_loss, stats.accuracy
        );
    }
    println!(
        "final: loss {:.4}, train accuracy {:.3}, held-out accuracy {:.3}",
        history.final_loss(),
        model.accuracy(dataset.features(), dataset.labels(), &train_rows)?,
        model.accuracy(dataset.features(), dataset.labels(), &eval_rows)?,
    );
    Ok(())
}

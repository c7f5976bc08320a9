//! Runs the likelihood-ratio attack against a deliberately memorizing model.
//!
//! For every candidate sample the attack trains a small ensemble of shadow
//! models, half with the candidate in their training data and half without,
//! fits Gaussians to the logit-scale confidences from each half, and scores
//! the candidate by the log likelihood ratio of the target model's own
//! confidence. Retraining per candidate is expensive, so this variant keeps
//! the ensembles tiny and caps the candidate list.
//!
//! ```sh
//! cargo run --release --example lira_lite
//! ```

use mia_audit::attacks::{lira_lite, LiraConfig};
use mia_audit::data::{generate_synthetic, SyntheticSpec};
use mia_audit::metrics::{auc, roc_curve};
use mia_audit::nn::{train, MlpConfig, MlpModel, TrainConfig};

fn main() -> mia_audit::Result<()> {
    let dataset = generate_synthetic(&SyntheticSpec {
        n_samples: 120,
        n_features: 4,
        n_classes: 4,
        separation: 1.0,
        noise_std: 1.5,
        seed: 77,
    })?;

    // A roomy model on a noisy task memorizes its 30 training rows.
    let members: Vec<usize> = (0..30).collect();
    let nonmembers: Vec<usize> = (90..110).collect();
    let shadow_pool: Vec<usize> = (30..90).collect();

    let arch = MlpConfig::new(vec![4, 64, 4], 9);
    let train_config = TrainConfig { epochs: 120, base_lr: 0.1, seed: 3, ..TrainConfig::default() };
    let (target, history) =
        train(MlpModel::init(arch.clone())?, dataset.features(), dataset.labels(), &members, &train_config)?;
    println!("target train accuracy: {:.3}", history.final_accuracy());

    // Shadows copy the target's training recipe, the canonical assumption.
    // Four points per Gaussian need a generous variance floor.
    let config =
        LiraConfig { n_shadow: 8, variance_floor: 0.25, train: train_config, seed: 11 };
    let output = lira_lite(&dataset, &target, &members, &nonmembers, &shadow_pool, &arch, &config)?;

    let mean = |member: bool| {
        let picked: Vec<f64> = output
            .scores
            .iter()
            .zip(&output.ground_truth)
            .filter(|(_, &t)| t == member)
            .map(|(&s, _)| s)
            .collect();
        picked.iter().sum::<f64>() / picked.len() as f64
    };
    println!("mean log likelihood ratio: members {:+.2}, non-members {:+.2}", mean(true), mean(false));
    println!("auc: {:.3}", auc(&roc_curve(&output.scores, &output.ground_truth)?));
    Ok(())
}

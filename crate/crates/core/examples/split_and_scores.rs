//! Builds the six-way data split, trains target and reference models, and
//! computes per-sample membership score records.
//!
//! Each record carries the raw score (the negated cross-entropy of the true
//! label), the calibrated score (raw minus the reference model's score, so
//! easy samples stop looking like members), the neighborhood information
//! weight, and their product. Members should sit higher than non-members
//! under the calibrated scores.
//!
//! ```sh
//! cargo run --example split_and_scores
//! ```

use mia_audit::data::{
    generate_synthetic, six_way_split, FeatureStats, SplitSizes, SplitSpec, SyntheticSpec,
};
use mia_audit::nn::{train, MlpConfig, MlpModel, TrainConfig};
use mia_audit::scores::{build_records, AuxEmbeddings};

fn main() -> mia_audit::Result<()> {
    let dataset = generate_synthetic(&SyntheticSpec {
        n_samples: 600,
        n_features: 8,
        n_classes: 4,
        separation: 2.0,
        noise_std: 1.5,
        seed: 11,
    })?;
    let stats = FeatureStats::fit(dataset.features(), &(0..dataset.n_rows()).collect::<Vec<_>>())?;
    let dataset = dataset.with_features(stats.transform(dataset.features())?)?;

    let split = six_way_split(
        dataset.n_rows(),
        &SplitSpec { sizes: SplitSizes::Counts([100, 50, 100, 50, 150, 100]), seed: 4 },
    )?;
    for (role, rows) in split.roles() {
        println!("{role:>14}: {} rows", rows.len());
    }

    let train_model = |rows: &[usize], seed: u64| -> mia_audit::Result<MlpModel> {
        let model = MlpModel::init(MlpConfig::new(vec![8, 32, 4], seed))?;
        let config = TrainConfig { epochs: 60, seed, ..TrainConfig::default() };
        Ok(train(model, dataset.features(), dataset.labels(), rows, &config)?.0)
    };
    let target = train_model(&split.target_train, 1)?;
    let reference = train_model(&split.ref_train, 2)?;

    // The attacker-side population embeds each candidate's neighborhood.
    // ReLU embeddings give almost every pair a positive cosine similarity,
    // so a tight threshold is what separates dense from sparse regions.
    let aux = AuxEmbeddings::compute(&reference, &dataset, &split.ref_train)?;
    let records = build_records(
        &target,
        &reference,
        &dataset,
        &split.target_train,
        &split.test,
        &aux,
        0.7,
    )?;

    println!("\n  id  member     s_target      s_cal     ni  s_cal_enhanced  hardness");
    for record in records.iter().step_by(records.len() / 12) {
        println!(
            "{:>4}  {:>6}  {:>11.4}  {:>9.4}  {:>5.3}  {:>14.4}  {:?}",
            record.sample_id,
            record.is_member,
            record.s_target,
            record.s_cal,
            record.ni,
            record.s_cal_enhanced,
            record.hardness,
        );
    }

    let mean = |member: bool| {
        let picked: Vec<f64> = records
            .iter()
            .filter(|r| r.is_member == member)
            .map(|r| r.s_cal_enhanced)
            .collect();
        picked.iter().sum::<f64>() / picked.len() as f64
    };
    println!("\nmean enhanced calibrated score: members {:.4}, non-members {:.4}", mean(true), mean(false));
    Ok(())
}

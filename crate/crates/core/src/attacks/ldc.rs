//! Learning-based difficulty calibration.
//!
//! Instead of thresholding one score, a small MLP learns the membership
//! decision from three ingredients per sample: the target-model score, the
//! calibrated score scaled by neighborhood information, and the class
//! label. It trains on a shadow model's members and non-members, where
//! ground truth is free, then transfers to the target model's records.

use serde::{Deserialize, Serialize};

use crate::attacks::AttackOutput;
use crate::data::FeatureStats;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{train, MlpConfig, MlpModel, TrainConfig};
use crate::scores::ScoreRecord;
use crate::seeds::derive_seed;

/// Which inputs the classifier sees. Ablations switch individual flags off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdcFeatures {
    /// Raw target-model membership score.
    pub use_s_target: bool,
    /// Enhanced calibrated score (calibration times neighborhood info).
    pub use_s_cal: bool,
    /// One-hot class label.
    pub use_label: bool,
}

impl Default for LdcFeatures {
    fn default() -> Self {
        LdcFeatures { use_s_target: true, use_s_cal: true, use_label: true }
    }
}

impl LdcFeatures {
    pub fn validate(&self) -> Result<()> {
        if !(self.use_s_target || self.use_s_cal || self.use_label) {
            return Err(Error::Config("ldc needs at least one feature enabled".into()));
        }
        Ok(())
    }

    /// Input width: one column per enabled score, `n_classes` for the label.
    pub fn width(&self, n_classes: usize) -> usize {
        usize::from(self.use_s_target)
            + usize::from(self.use_s_cal)
            + if self.use_label { n_classes } else { 0 }
    }

    /// Feature vector of one record, in the order s_target, enhanced
    /// calibrated score, one-hot label.
    pub fn vector(&self, record: &ScoreRecord, n_classes: usize) -> Result<Vec<f64>> {
        if record.label >= n_classes {
            return Err(Error::Shape(format!(
                "record label {} out of range for {n_classes} classes",
                record.label
            )));
        }
        let mut v = Vec::with_capacity(self.width(n_classes));
        if self.use_s_target {
            v.push(record.s_target);
        }
        if self.use_s_cal {
            v.push(record.s_cal_enhanced);
        }
        if self.use_label {
            for c in 0..n_classes {
                v.push(if c == record.label { 1.0 } else { 0.0 });
            }
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdcConfig {
    /// Hidden widths of the membership classifier.
    pub hidden: Vec<usize>,
    pub features: LdcFeatures,
    /// Training recipe; seeds are derived from `seed`.
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for LdcConfig {
    fn default() -> Self {
        LdcConfig {
            hidden: vec![64, 32],
            features: LdcFeatures::default(),
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

/// Fitted membership classifier plus the normalization it was fit with.
#[derive(Debug, Clone, PartialEq)]
pub struct LdcClassifier {
    model: MlpModel,
    stats: FeatureStats,
    features: LdcFeatures,
    n_classes: usize,
}

impl LdcClassifier {
    /// Trains on records whose `is_member` flag is the classifier label.
    /// Normalization statistics come from these records only.
    pub fn fit(records: &[ScoreRecord], n_classes: usize, config: &LdcConfig) -> Result<Self> {
        config.features.validate()?;
        let members = records.iter().filter(|r| r.is_member).count();
        if members == 0 || members == records.len() {
            return Err(Error::Data(format!(
                "ldc training needs both classes, got {members} members of {}",
                records.len()
            )));
        }
        let width = config.features.width(n_classes);
        let mut data = Vec::with_capacity(records.len() * width);
        let mut labels = Vec::with_capacity(records.len());
        for r in records {
            data.extend(config.features.vector(r, n_classes)?);
            labels.push(usize::from(r.is_member));
        }
        let raw = Matrix::from_vec(records.len(), width, data)?;
        let all_rows: Vec<usize> = (0..records.len()).collect();
        let stats = FeatureStats::fit(&raw, &all_rows)?;
        let normalized = stats.transform(&raw)?;

        let mut sizes = vec![width];
        sizes.extend(&config.hidden);
        sizes.push(2);
        let init = MlpModel::init(MlpConfig::new(sizes, derive_seed(config.seed, "ldc-init", 0)))?;
        let train_cfg = TrainConfig {
            seed: derive_seed(config.seed, "ldc-shuffle", 0),
            ..config.train.clone()
        };
        let (model, _) = train(init, &normalized, &labels, &all_rows, &train_cfg)?;
        Ok(LdcClassifier { model, stats, features: config.features, n_classes })
    }

    /// Membership probability for each record.
    pub fn score_records(&self, records: &[ScoreRecord]) -> Result<Vec<f64>> {
        records
            .iter()
            .map(|r| {
                let raw = self.features.vector(r, self.n_classes)?;
                let x = self.stats.transform_row(&raw)?;
                Ok(self.model.predict_proba(&x)?[1])
            })
            .collect()
    }

    /// Scores an evaluation set and packages the attack output.
    pub fn attack(&self, records: &[ScoreRecord]) -> Result<AttackOutput> {
        AttackOutput::new(
            "ldc",
            records.iter().map(|r| r.sample_id).collect(),
            self.score_records(records)?,
            records.iter().map(|r| r.is_member).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{auc, roc_curve};
    use crate::scores::Hardness;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn feature_width_arithmetic() {
        let all = LdcFeatures::default();
        assert_eq!(all.width(4), 6);
        assert_eq!(all.width(2), 4);
        let no_label = LdcFeatures { use_label: false, ..all };
        assert_eq!(no_label.width(4), 2);
        let only_cal = LdcFeatures { use_s_target: false, use_label: false, ..all };
        assert_eq!(only_cal.width(4), 1);
        let none = LdcFeatures { use_s_target: false, use_s_cal: false, use_label: false };
        assert!(none.validate().is_err());
    }

    fn record(is_member: bool, s_target: f64, s_cal_enhanced: f64, label: usize) -> ScoreRecord {
        ScoreRecord {
            sample_id: 0,
            label,
            is_member,
            s_target,
            s_ref: s_target - s_cal_enhanced,
            s_cal: s_cal_enhanced,
            ni: 1.0,
            s_cal_enhanced,
            hardness: Hardness::Easy,
        }
    }

    #[test]
    fn feature_vector_layout() {
        let r = record(true, -0.5, 0.3, 2);
        let v = LdcFeatures::default().vector(&r, 4).unwrap();
        assert_eq!(v, vec![-0.5, 0.3, 0.0, 0.0, 1.0, 0.0]);
        let v = LdcFeatures { use_label: false, ..Default::default() }.vector(&r, 4).unwrap();
        assert_eq!(v, vec![-0.5, 0.3]);
        assert!(LdcFeatures::default().vector(&r, 2).is_err());
    }

    /// Members and non-members fabricated to differ only in the enhanced
    /// calibrated score.
    fn separable_records(n: usize, seed: u64) -> Vec<ScoreRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records = Vec::with_capacity(2 * n);
        for i in 0..2 * n {
            let is_member = i % 2 == 0;
            let center = if is_member { 1.0 } else { -1.0 };
            let mut r = record(
                is_member,
                -1.0,
                center + rng.gen_range(-0.3..0.3),
                i % 3,
            );
            r.sample_id = i;
            records.push(r);
        }
        records
    }

    fn quick_config() -> LdcConfig {
        LdcConfig {
            hidden: vec![16, 8],
            train: TrainConfig { epochs: 40, ..TrainConfig::default() },
            ..LdcConfig::default()
        }
    }

    #[test]
    fn separates_fabricated_records() {
        let train_records = separable_records(60, 1);
        let eval_records = separable_records(40, 2);
        let clf = LdcClassifier::fit(&train_records, 3, &quick_config()).unwrap();
        let out = clf.attack(&eval_records).unwrap();
        assert_eq!(out.attack, "ldc");
        let a = auc(&roc_curve(&out.scores, &out.ground_truth).unwrap());
        assert!(a > 0.95, "ldc failed to separate clean signal: auc {a}");
    }

    /// Dropping the only informative feature must destroy the attack.
    #[test]
    fn ablated_features_lose_the_signal() {
        let train_records = separable_records(60, 1);
        let eval_records = separable_records(40, 2);
        let config = LdcConfig {
            features: LdcFeatures { use_s_cal: false, ..Default::default() },
            ..quick_config()
        };
        let clf = LdcClassifier::fit(&train_records, 3, &config).unwrap();
        let out = clf.attack(&eval_records).unwrap();
        let a = auc(&roc_curve(&out.scores, &out.ground_truth).unwrap());
        assert!(
            (a - 0.5).abs() < 0.15,
            "without the calibrated score the fabricated task is chance, got {a}"
        );
    }

    #[test]
    fn fit_is_deterministic_and_seed_sensitive() {
        let records = separable_records(30, 5);
        let run = |seed: u64| {
            let config = LdcConfig { seed, ..quick_config() };
            let clf = LdcClassifier::fit(&records, 3, &config).unwrap();
            clf.score_records(&records).unwrap()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn fit_rejects_single_class() {
        let mut records = separable_records(10, 0);
        for r in &mut records {
            r.is_member = true;
        }
        assert!(LdcClassifier::fit(&records, 3, &quick_config()).is_err());
    }
}

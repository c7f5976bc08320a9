//! Synthetic Gaussian-blob classification data.
//!
//! Class `c` is centered at `separation` along feature axis `c mod
//! n_features`. With more classes than features the extra classes reuse
//! earlier axes, which deliberately creates indistinguishable class pairs; a
//! model can then only separate them by memorizing its training rows, a
//! useful regime for membership experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
    /// Distance of each class center from the origin.
    pub separation: f64,
    /// Per-coordinate Gaussian noise around the center.
    pub noise_std: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        if self.n_features == 0 {
            return Err(Error::Config("n_features must be positive".into()));
        }
        if self.n_classes < 2 {
            return Err(Error::Config(format!(
                "need at least two classes, got {}",
                self.n_classes
            )));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::Config(format!(
                "separation must be nonnegative, got {}",
                self.separation
            )));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config(format!(
                "noise_std must be positive, got {}",
                self.noise_std
            )));
        }
        Ok(())
    }

    /// Center of class `c`.
    pub fn class_mean(&self, class: usize) -> Vec<f64> {
        let mut mean = vec![0.0; self.n_features];
        mean[class % self.n_features] = self.separation;
        mean
    }
}

/// Generates `n_samples` rows with labels assigned round-robin, so class
/// counts differ by at most one. All draws come from one ChaCha stream
/// seeded with `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_std)
        .map_err(|e| Error::Config(format!("invalid noise: {e}")))?;
    let mut data = Vec::with_capacity(spec.n_samples * spec.n_features);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let class = i % spec.n_classes;
        let mean = spec.class_mean(class);
        for m in mean {
            data.push(m + noise.sample(&mut rng));
        }
        labels.push(class);
    }
    let features = Matrix::from_vec(spec.n_samples, spec.n_features, data)?;
    LabeledDataset::with_default_names(features, labels, spec.n_classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            n_samples: 3000,
            n_features: 4,
            n_classes: 3,
            separation: 2.5,
            noise_std: 1.0,
            seed: 42,
        }
    }

    #[test]
    fn class_counts_are_balanced() {
        let d = generate_synthetic(&spec()).unwrap();
        let mut counts = [0usize; 3];
        for &l in d.labels() {
            counts[l] += 1;
        }
        assert_eq!(counts, [1000, 1000, 1000]);
        let d = generate_synthetic(&SyntheticSpec { n_samples: 3001, ..spec() }).unwrap();
        let mut counts = [0usize; 3];
        for &l in d.labels() {
            counts[l] += 1;
        }
        assert_eq!(counts, [1001, 1000, 1000]);
    }

    #[test]
    fn per_class_means_match_centers() {
        let s = spec();
        let d = generate_synthetic(&s).unwrap();
        for class in 0..s.n_classes {
            let rows: Vec<usize> =
                (0..d.n_rows()).filter(|&i| d.label(i) == class).collect();
            let expected = s.class_mean(class);
            for f in 0..s.n_features {
                let mean: f64 =
                    rows.iter().map(|&r| d.row(r)[f]).sum::<f64>() / rows.len() as f64;
                // 1000 samples of sigma=1 noise: mean error is about 0.03,
                // so 0.15 is a five-sigma margin.
                assert!(
                    (mean - expected[f]).abs() < 0.15,
                    "class {class} feature {f}: mean {mean}, expected {}",
                    expected[f]
                );
            }
        }
    }

    #[test]
    fn classes_beyond_features_share_axes() {
        let s = SyntheticSpec { n_features: 2, n_classes: 4, ..spec() };
        assert_eq!(s.class_mean(0), s.class_mean(2));
        assert_eq!(s.class_mean(1), s.class_mean(3));
        assert_ne!(s.class_mean(0), s.class_mean(1));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_synthetic(&spec()).unwrap();
        let b = generate_synthetic(&spec()).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&SyntheticSpec { seed: 43, ..spec() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_synthetic(&SyntheticSpec { n_samples: 0, ..spec() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { n_classes: 1, ..spec() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { noise_std: 0.0, ..spec() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { separation: -1.0, ..spec() }).is_err());
    }
}

//! Per-feature standardization fitted on a chosen subset of rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Standard deviations below this are clamped so constant features map to
/// zero instead of dividing by zero.
pub const STD_FLOOR: f64 = 1e-9;

/// Column means and standard deviations for z-scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl FeatureStats {
    /// Fits population statistics over the selected rows only. Auditing code
    /// fits on the data the adversary is allowed to see, never on the whole
    /// table.
    pub fn fit(features: &Matrix, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("cannot fit statistics on zero rows".into()));
        }
        for &r in rows {
            if r >= features.rows() {
                return Err(Error::Shape(format!("row {r} out of bounds")));
            }
        }
        let cols = features.cols();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; cols];
        for &r in rows {
            for (m, v) in mean.iter_mut().zip(features.row(r)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; cols];
        for &r in rows {
            for ((s, v), m) in var.iter_mut().zip(features.row(r)).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
        Ok(FeatureStats { mean, std })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    /// Z-scores one row in place semantics: returns the transformed copy.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::Shape(format!(
                "row has {} features, stats were fit on {}",
                row.len(),
                self.mean.len()
            )));
        }
        Ok(row
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    /// Z-scores every row of a matrix.
    pub fn transform(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "matrix has {} columns, stats were fit on {}",
                features.cols(),
                self.mean.len()
            )));
        }
        let mut out = features.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_matches_hand_computation() {
        let m = Matrix::from_vec(3, 2, vec![1.0, 10.0, 2.0, 10.0, 3.0, 10.0]).unwrap();
        let stats = FeatureStats::fit(&m, &[0, 1, 2]).unwrap();
        assert!((stats.mean()[0] - 2.0).abs() < 1e-15);
        // Population std of {1, 2, 3} is sqrt(2/3).
        assert!((stats.std()[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        // Constant column hits the floor.
        assert_eq!(stats.std()[1], STD_FLOOR);
        let t = stats.transform(&m).unwrap();
        // Constant column maps to exactly zero.
        assert_eq!(t.get(0, 1), 0.0);
        assert_eq!(t.get(2, 1), 0.0);
    }

    #[test]
    fn transform_standardizes_the_fit_rows() {
        let m = Matrix::from_vec(4, 1, vec![1.0, 5.0, -3.0, 100.0]).unwrap();
        let rows = [0, 1, 2];
        let stats = FeatureStats::fit(&m, &rows).unwrap();
        let t = stats.transform(&m).unwrap();
        let vals: Vec<f64> = rows.iter().map(|&r| t.get(r, 0)).collect();
        let mean: f64 = vals.iter().sum::<f64>() / 3.0;
        let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
        // Row 3 was not part of the fit; it lands far outside.
        assert!(t.get(3, 0) > 10.0);
    }

    #[test]
    fn subset_fit_ignores_other_rows() {
        let m = Matrix::from_vec(3, 1, vec![0.0, 2.0, 1000.0]).unwrap();
        let stats = FeatureStats::fit(&m, &[0, 1]).unwrap();
        assert!((stats.mean()[0] - 1.0).abs() < 1e-15);
        assert!((stats.std()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = Matrix::zeros(2, 2);
        assert!(FeatureStats::fit(&m, &[]).is_err());
        assert!(FeatureStats::fit(&m, &[5]).is_err());
        let stats = FeatureStats::fit(&m, &[0, 1]).unwrap();
        assert!(stats.transform_row(&[1.0]).is_err());
        assert!(stats.transform(&Matrix::zeros(1, 3)).is_err());
    }
}

//! Attack evaluation: ROC and precision-recall curves built by exact
//! counting, trapezoidal AUC, TPR at fixed low FPR, and balanced accuracy.
//!
//! An attack that looks strong on AUC can be useless where it matters, at
//! very low false-positive rates, so the report always carries TPR at
//! 1e-4, 1e-3, and 1e-2 alongside the aggregate numbers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// FPR operating points reported by default.
pub const DEFAULT_FPR_TARGETS: [f64; 3] = [1e-4, 1e-3, 1e-2];

/// Rates are clamped to this floor in the extra export columns meant for
/// log-log plots; the raw columns stay exact.
pub const LOG_PLOT_FLOOR: f64 = 1e-6;

/// One ROC operating point: predict member when `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Starts at the sentinel `(inf, 0, 0)`, then one point per distinct
    /// score in descending order; the final point is always `(min, 1, 1)`.
    pub points: Vec<RocPoint>,
    pub n_members: usize,
    pub n_nonmembers: usize,
}

fn check_scores(scores: &[f64], ground_truth: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != ground_truth.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            ground_truth.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Data("scores must be finite".into()));
    }
    let n_members = ground_truth.iter().filter(|&&m| m).count();
    let n_nonmembers = ground_truth.len() - n_members;
    if n_members == 0 || n_nonmembers == 0 {
        return Err(Error::Data(format!(
            "need both classes: {n_members} members, {n_nonmembers} non-members"
        )));
    }
    Ok((n_members, n_nonmembers))
}

/// Builds the exact ROC curve by sweeping the threshold over every distinct
/// score. Counts are integers until the final division, so equal inputs give
/// bit-equal curves.
pub fn roc_curve(scores: &[f64], ground_truth: &[bool]) -> Result<RocCurve> {
    let (n_members, n_nonmembers) = check_scores(scores, ground_truth)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        // Consume the whole tie group before emitting a point.
        while i < order.len() && scores[order[i]] == score {
            if ground_truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: score,
            fpr: fp as f64 / n_nonmembers as f64,
            tpr: tp as f64 / n_members as f64,
        });
    }
    Ok(RocCurve { points, n_members, n_nonmembers })
}

/// Area under the ROC curve by trapezoidal integration. Equals the
/// Mann-Whitney statistic with half credit for ties.
pub fn auc(roc: &RocCurve) -> f64 {
    let mut area = 0.0;
    for pair in roc.points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    area
}

/// Highest TPR achievable without exceeding `max_fpr`. Steps only, no
/// interpolation: the value is attained by an actual threshold.
pub fn tpr_at_fpr(roc: &RocCurve, max_fpr: f64) -> f64 {
    roc.points
        .iter()
        .filter(|p| p.fpr <= max_fpr)
        .map(|p| p.tpr)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// Starts at the sentinel `(inf, 0, 0)`: with nothing predicted,
    /// precision is defined as 0 here.
    pub points: Vec<PrPoint>,
    pub n_members: usize,
    pub n_nonmembers: usize,
}

/// Precision-recall curve over the same thresholds as [`roc_curve`].
pub fn pr_curve(scores: &[f64], ground_truth: &[bool]) -> Result<PrCurve> {
    let (n_members, n_nonmembers) = check_scores(scores, ground_truth)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut points = vec![PrPoint { threshold: f64::INFINITY, recall: 0.0, precision: 0.0 }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        while i < order.len() && scores[order[i]] == score {
            if ground_truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold: score,
            recall: tp as f64 / n_members as f64,
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    Ok(PrCurve { points, n_members, n_nonmembers })
}

/// Best precision among operating points reaching at least `min_recall`.
pub fn precision_at_recall(pr: &PrCurve, min_recall: f64) -> f64 {
    pr.points
        .iter()
        .filter(|p| p.recall >= min_recall)
        .map(|p| p.precision)
        .fold(0.0, f64::max)
}

/// Counts from thresholding at a fixed value with `score >= threshold`
/// predicting member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl Confusion {
    pub fn tpr(&self) -> f64 {
        self.true_positives as f64 / (self.true_positives + self.false_negatives) as f64
    }

    pub fn fpr(&self) -> f64 {
        self.false_positives as f64 / (self.false_positives + self.true_negatives) as f64
    }

    pub fn tnr(&self) -> f64 {
        1.0 - self.fpr()
    }

    /// Mean of TPR and TNR; robust to class imbalance.
    pub fn balanced_accuracy(&self) -> f64 {
        (self.tpr() + self.tnr()) / 2.0
    }

    pub fn accuracy(&self) -> f64 {
        let correct = self.true_positives + self.true_negatives;
        let total = correct + self.false_positives + self.false_negatives;
        correct as f64 / total as f64
    }
}

/// Confusion counts at one threshold, predicting member on
/// `score >= threshold`. At a threshold equal to a distinct score this
/// reproduces that score's ROC point exactly.
pub fn confusion_at_threshold(
    scores: &[f64],
    ground_truth: &[bool],
    threshold: f64,
) -> Result<Confusion> {
    check_scores(scores, ground_truth)?;
    let mut c = Confusion {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (&s, &member) in scores.iter().zip(ground_truth) {
        match (s >= threshold, member) {
            (true, true) => c.true_positives += 1,
            (true, false) => c.false_positives += 1,
            (false, false) => c.true_negatives += 1,
            (false, true) => c.false_negatives += 1,
        }
    }
    Ok(c)
}

/// Threshold from the ROC sweep with the highest balanced accuracy; ties go
/// to the higher threshold (fewer accusations).
pub fn best_balanced_accuracy(roc: &RocCurve) -> (f64, f64) {
    let mut best_threshold = f64::INFINITY;
    let mut best_value = 0.5;
    for p in &roc.points {
        let value = (p.tpr + (1.0 - p.fpr)) / 2.0;
        if value > best_value {
            best_value = value;
            best_threshold = p.threshold;
        }
    }
    (best_threshold, best_value)
}

/// Writes the ROC curve as CSV. The `*_floored` columns clamp rates to
/// [`LOG_PLOT_FLOOR`] so they can go straight onto log axes; `fpr` and `tpr`
/// stay raw.
pub fn save_roc_csv(roc: &RocCurve, path: &Path) -> Result<()> {
    let file = create_with_parents(path)?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "threshold,fpr,tpr,fpr_floored,tpr_floored").map_err(io_err)?;
    for p in &roc.points {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.threshold,
            p.fpr,
            p.tpr,
            p.fpr.max(LOG_PLOT_FLOOR),
            p.tpr.max(LOG_PLOT_FLOOR)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Writes the PR curve as CSV.
pub fn save_pr_csv(pr: &PrCurve, path: &Path) -> Result<()> {
    let file = create_with_parents(path)?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "threshold,recall,precision").map_err(io_err)?;
    for p in &pr.points {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", p.threshold, p.recall, p.precision)
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn create_with_parents(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Members {2, 3}, non-members {1, 2.5}: of the four member/non-member
    /// pairs exactly three rank the member higher, so AUC must be 0.75.
    #[test]
    fn auc_matches_hand_enumeration() {
        let scores = [2.0, 3.0, 1.0, 2.5];
        let truth = [true, true, false, false];
        let roc = roc_curve(&scores, &truth).unwrap();
        assert!((auc(&roc) - 0.75).abs() < 1e-15);
        // Distinct thresholds: inf, 3, 2.5, 2, 1.
        assert_eq!(roc.points.len(), 5);
        assert_eq!(roc.points[0].threshold, f64::INFINITY);
        let last = roc.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn ties_earn_half_credit() {
        let scores = [1.0, 1.0];
        let truth = [true, false];
        let roc = roc_curve(&scores, &truth).unwrap();
        assert!((auc(&roc) - 0.5).abs() < 1e-15);
        // One tie group: sentinel plus a single (1,1) point.
        assert_eq!(roc.points.len(), 2);
    }

    #[test]
    fn perfect_and_inverted_rankings() {
        let scores = [5.0, 4.0, 1.0, 0.0];
        let truth = [true, true, false, false];
        let roc = roc_curve(&scores, &truth).unwrap();
        assert!((auc(&roc) - 1.0).abs() < 1e-15);
        let inverted = [true, true, false, false];
        let roc = roc_curve(&[0.0, 1.0, 4.0, 5.0], &inverted).unwrap();
        assert!(auc(&roc).abs() < 1e-15);
    }

    /// Brute-force oracle: try every candidate threshold by direct counting
    /// and keep the best TPR with FPR within budget.
    fn tpr_at_fpr_oracle(scores: &[f64], truth: &[bool], max_fpr: f64) -> f64 {
        let p = truth.iter().filter(|&&m| m).count() as f64;
        let n = truth.len() as f64 - p;
        let mut best = 0.0f64;
        let mut candidates: Vec<f64> = scores.to_vec();
        candidates.push(f64::INFINITY);
        for &t in &candidates {
            let tp = scores
                .iter()
                .zip(truth)
                .filter(|&(s, &m)| *s >= t && m)
                .count() as f64;
            let fp = scores
                .iter()
                .zip(truth)
                .filter(|&(s, &m)| *s >= t && !m)
                .count() as f64;
            if fp / n <= max_fpr {
                best = best.max(tp / p);
            }
        }
        best
    }

    #[test]
    fn tpr_at_fpr_is_conservative() {
        let scores = [9.0, 8.0, 7.0, 6.5, 6.0, 5.0, 4.0, 3.0];
        let truth = [true, false, true, true, false, true, false, false];
        let roc = roc_curve(&scores, &truth).unwrap();
        for target in [0.0, 0.2, 0.25, 0.4, 0.5, 0.9, 1.0] {
            let got = tpr_at_fpr(&roc, target);
            let want = tpr_at_fpr_oracle(&scores, &truth, target);
            assert!((got - want).abs() < 1e-15, "target {target}: {got} vs {want}");
        }
        // Between steps the value must not interpolate: at fpr 0.2 the only
        // admissible thresholds keep fp = 0, so tpr stays at 1/4.
        assert!((tpr_at_fpr(&roc, 0.2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pr_curve_matches_hand_computation() {
        let scores = [3.0, 2.0, 1.0];
        let truth = [true, false, true];
        let pr = pr_curve(&scores, &truth).unwrap();
        // Sentinel, then thresholds 3, 2, 1.
        assert_eq!(pr.points.len(), 4);
        assert_eq!(pr.points[0].precision, 0.0);
        assert_eq!(pr.points[0].recall, 0.0);
        assert!((pr.points[1].precision - 1.0).abs() < 1e-15);
        assert!((pr.points[1].recall - 0.5).abs() < 1e-15);
        assert!((pr.points[2].precision - 0.5).abs() < 1e-15);
        assert!((pr.points[3].precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((pr.points[3].recall - 1.0).abs() < 1e-15);
        assert!((precision_at_recall(&pr, 0.5) - 1.0).abs() < 1e-15);
        assert!((precision_at_recall(&pr, 0.9) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn balanced_accuracy_matches_arithmetic() {
        // tp=3, fn=1, tn=2, fp=2: tpr 0.75, tnr 0.5, balanced 0.625.
        let c = Confusion {
            true_positives: 3,
            false_negatives: 1,
            true_negatives: 2,
            false_positives: 2,
        };
        assert!((c.balanced_accuracy() - 0.625).abs() < 1e-15);
        assert!((c.tpr() - 0.75).abs() < 1e-15);
        assert!((c.fpr() - 0.5).abs() < 1e-15);
        assert!((c.accuracy() - 0.625).abs() < 1e-15);
    }

    /// Thresholding at a distinct score must land exactly on its ROC point.
    #[test]
    fn confusion_agrees_with_roc_points() {
        let scores = [4.0, 3.0, 3.0, 2.0, 1.0, 0.5];
        let truth = [true, false, true, true, false, false];
        let roc = roc_curve(&scores, &truth).unwrap();
        for p in &roc.points[1..] {
            let c = confusion_at_threshold(&scores, &truth, p.threshold).unwrap();
            assert_eq!(c.tpr(), p.tpr);
            assert_eq!(c.fpr(), p.fpr);
        }
    }

    #[test]
    fn best_balanced_accuracy_scans_the_curve() {
        let scores = [4.0, 3.0, 2.0, 1.0];
        let truth = [true, true, false, false];
        let roc = roc_curve(&scores, &truth).unwrap();
        let (threshold, value) = best_balanced_accuracy(&roc);
        assert!((value - 1.0).abs() < 1e-15);
        assert_eq!(threshold, 3.0);
        let c = confusion_at_threshold(&scores, &truth, threshold).unwrap();
        assert_eq!(c.balanced_accuracy(), value);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(roc_curve(&[1.0], &[true]).is_err());
        assert!(roc_curve(&[1.0, 2.0], &[false, false]).is_err());
        assert!(roc_curve(&[f64::NAN, 2.0], &[true, false]).is_err());
        assert!(roc_curve(&[1.0, 2.0, 3.0], &[true, false]).is_err());
    }

    #[test]
    fn csv_exports_include_floored_columns() {
        let dir = tempfile::tempdir().unwrap();
        let scores = [2.0, 1.0];
        let truth = [true, false];
        let roc = roc_curve(&scores, &truth).unwrap();
        let path = dir.path().join("roc.csv");
        save_roc_csv(&roc, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "threshold,fpr,tpr,fpr_floored,tpr_floored");
        // Sentinel row: raw zeros, floored at 1e-6.
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "inf");
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(fields[3].parse::<f64>().unwrap(), LOG_PLOT_FLOOR);
        assert_eq!(fields[4].parse::<f64>().unwrap(), LOG_PLOT_FLOOR);

        let pr = pr_curve(&scores, &truth).unwrap();
        let pr_path = dir.path().join("pr.csv");
        save_pr_csv(&pr, &pr_path).unwrap();
        let text = std::fs::read_to_string(&pr_path).unwrap();
        assert!(text.starts_with("threshold,recall,precision"));
    }

    /// Mann-Whitney oracle: AUC equals the fraction of member/non-member
    /// pairs ranked correctly, ties counting half.
    fn mann_whitney(scores: &[f64], truth: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &m) in truth.iter().enumerate() {
            if !m {
                continue;
            }
            for (j, &n) in truth.iter().enumerate() {
                if n {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    proptest! {
        #[test]
        fn auc_equals_mann_whitney(
            values in proptest::collection::vec((0u8..10, proptest::bool::ANY), 4..60),
        ) {
            // Quantized scores force plenty of ties.
            let scores: Vec<f64> = values.iter().map(|(v, _)| *v as f64 / 3.0).collect();
            let truth: Vec<bool> = values.iter().map(|(_, m)| *m).collect();
            prop_assume!(truth.iter().any(|&m| m) && truth.iter().any(|&m| !m));
            let roc = roc_curve(&scores, &truth).unwrap();
            let a = auc(&roc);
            let mw = mann_whitney(&scores, &truth);
            prop_assert!((a - mw).abs() < 1e-12, "auc {a} vs mann-whitney {mw}");
        }

        #[test]
        fn roc_curve_is_monotone(
            values in proptest::collection::vec((-50i32..50, proptest::bool::ANY), 4..80),
        ) {
            let scores: Vec<f64> = values.iter().map(|(v, _)| *v as f64 / 7.0).collect();
            let truth: Vec<bool> = values.iter().map(|(_, m)| *m).collect();
            prop_assume!(truth.iter().any(|&m| m) && truth.iter().any(|&m| !m));
            let roc = roc_curve(&scores, &truth).unwrap();
            let first = roc.points.first().unwrap();
            prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
            prop_assert_eq!(first.threshold, f64::INFINITY);
            let last = roc.points.last().unwrap();
            prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
            for pair in roc.points.windows(2) {
                prop_assert!(pair[1].threshold < pair[0].threshold);
                prop_assert!(pair[1].fpr >= pair[0].fpr);
                prop_assert!(pair[1].tpr >= pair[0].tpr);
            }
            for p in &roc.points {
                prop_assert!((0.0..=1.0).contains(&p.fpr));
                prop_assert!((0.0..=1.0).contains(&p.tpr));
            }
            // tpr_at_fpr is monotone in its budget.
            let mut prev = 0.0;
            for target in [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0] {
                let t = tpr_at_fpr(&roc, target);
                prop_assert!(t >= prev);
                prev = t;
            }
        }
    }
}

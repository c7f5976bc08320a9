//! Per-attack metric summaries and the consolidated comparison report.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::AttackOutput;
use crate::error::{Error, Result};
use crate::metrics::{
    auc, best_balanced_accuracy, pr_curve, roc_curve, save_pr_csv, save_roc_csv, tpr_at_fpr,
    PrCurve, RocCurve,
};
use crate::pipeline::config::load_run_config;
use crate::pipeline::manifest::Manifest;
use crate::pipeline::run::{attack_file, CONFIG_FILE};

/// True-positive rate at one false-positive-rate budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Evaluation summary for one attack. Serialized field order is fixed, so
/// identical runs produce identical JSON bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub attack: String,
    pub n_members: usize,
    pub n_nonmembers: usize,
    pub auc: f64,
    /// Best balanced accuracy over all score thresholds, and the threshold
    /// reaching it.
    pub balanced_accuracy: f64,
    pub balanced_accuracy_threshold: f64,
    pub tpr_at_fpr: Vec<OperatingPoint>,
}

/// Computes the full evaluation for one attack output.
pub fn compute_metrics(
    output: &AttackOutput,
    fpr_targets: &[f64],
) -> Result<(MetricsReport, RocCurve, PrCurve)> {
    let roc = roc_curve(&output.scores, &output.ground_truth)?;
    let pr = pr_curve(&output.scores, &output.ground_truth)?;
    let (threshold, balanced) = best_balanced_accuracy(&roc);
    let report = MetricsReport {
        attack: output.attack.clone(),
        n_members: roc.n_members,
        n_nonmembers: roc.n_nonmembers,
        auc: auc(&roc),
        balanced_accuracy: balanced,
        balanced_accuracy_threshold: threshold,
        tpr_at_fpr: fpr_targets
            .iter()
            .map(|&fpr| OperatingPoint { fpr, tpr: tpr_at_fpr(&roc, fpr) })
            .collect(),
    };
    Ok((report, roc, pr))
}

pub fn save_metrics_report(report: &MetricsReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Report(format!("metrics serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_metrics_report(path: &Path) -> Result<MetricsReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Report(format!("{}: {e}", path.display())))
}

/// Writes the comparison table (CSV and aligned text) plus per-attack ROC
/// and precision-recall point files into `report_dir`.
pub fn write_report_files(
    rows: &[(MetricsReport, RocCurve, PrCurve)],
    fpr_targets: &[f64],
    report_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(report_dir).map_err(|e| Error::io(report_dir, e))?;
    for (report, roc, pr) in rows {
        save_roc_csv(roc, &report_dir.join(format!("{}_roc.csv", report.attack)))?;
        save_pr_csv(pr, &report_dir.join(format!("{}_pr.csv", report.attack)))?;
    }
    let reports: Vec<&MetricsReport> = rows.iter().map(|(r, _, _)| r).collect();
    write_summary_csv(&reports, fpr_targets, &report_dir.join("summary.csv"))?;
    let text = render_summary_text(&reports, fpr_targets);
    let path = report_dir.join("summary.txt");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn write_summary_csv(
    reports: &[&MetricsReport],
    fpr_targets: &[f64],
    path: &Path,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut header = String::from("attack,n_members,n_nonmembers,auc,balanced_accuracy");
    for t in fpr_targets {
        header.push_str(&format!(",tpr_at_fpr_{t}"));
    }
    let write_err = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(write_err)?;
    for r in reports {
        write!(
            w,
            "{},{},{},{:.6},{:.6}",
            r.attack, r.n_members, r.n_nonmembers, r.auc, r.balanced_accuracy
        )
        .map_err(write_err)?;
        for point in &r.tpr_at_fpr {
            write!(w, ",{:.6}", point.tpr).map_err(write_err)?;
        }
        writeln!(w).map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

/// Plain-text table, one row per attack, columns padded for alignment.
pub fn render_summary_text(reports: &[&MetricsReport], fpr_targets: &[f64]) -> String {
    let mut header: Vec<String> =
        ["attack", "members", "nonmembers", "auc", "bal_acc"].map(String::from).to_vec();
    header.extend(fpr_targets.iter().map(|t| format!("tpr@{t}")));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![
                r.attack.clone(),
                r.n_members.to_string(),
                r.n_nonmembers.to_string(),
                format!("{:.4}", r.auc),
                format!("{:.4}", r.balanced_accuracy),
            ];
            row.extend(r.tpr_at_fpr.iter().map(|p| format!("{:.4}", p.tpr)));
            row
        })
        .collect();
    let widths: Vec<usize> = header
        .iter()
        .enumerate()
        .map(|(c, h)| rows.iter().map(|r| r[c].len()).chain([h.len()]).max().unwrap())
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(rows.iter()) {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            if c == 0 {
                out.push_str(&format!("{cell:<width$}", width = widths[c]));
            } else {
                out.push_str(&format!("{cell:>width$}", width = widths[c]));
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// Regenerates the consolidated report for a completed run directory.
///
/// Attack outputs are re-read and re-evaluated; the manifest's content
/// hashes are verified first, so a report never silently summarizes
/// artifacts that changed since the run. Returns the table rows.
pub fn cmd_report(run_dir: &Path, out: Option<&Path>) -> Result<Vec<MetricsReport>> {
    let inner = || -> Result<Vec<MetricsReport>> {
        let config = load_run_config(&run_dir.join(CONFIG_FILE))?;
        let manifest = Manifest::load(run_dir)?;
        manifest.verify(run_dir)?;
        let mut rows = Vec::new();
        for kind in &config.attacks {
            let relative = attack_file(kind.name());
            let path = manifest.artifact_path(run_dir, &relative)?;
            let output = AttackOutput::load(&path)?;
            rows.push(compute_metrics(&output, &config.fpr_targets)?);
        }
        let report_dir: PathBuf =
            out.map(Path::to_path_buf).unwrap_or_else(|| run_dir.join("report"));
        write_report_files(&rows, &config.fpr_targets, &report_dir)?;
        Ok(rows.into_iter().map(|(r, _, _)| r).collect())
    };
    inner().map_err(|e| e.at_stage("report"))
}

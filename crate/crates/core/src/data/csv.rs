//! CSV ingestion: header-driven column typing, one-hot encoding of
//! categorical columns, and row dropping on missing values.

use std::collections::BTreeSet;
use std::path::Path;

use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Ingestion result: the encoded dataset plus how many raw rows were
/// discarded for missing values.
#[derive(Debug)]
pub struct LoadReport {
    pub dataset: LabeledDataset,
    pub rows_dropped: usize,
}

fn is_missing(field: &str) -> bool {
    let t = field.trim();
    t.is_empty() || t == "?"
}

/// Parses a field as a finite float. Values like "NaN" or "inf" count as
/// non-numeric so the column falls back to categorical encoding.
fn parse_numeric(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a CSV file with a header row into a [`LabeledDataset`].
///
/// The `label_column` (matched by exact header name) supplies the classes:
/// its distinct values, sorted lexicographically, become labels `0..k`.
/// Every other column is a feature. A column where every kept value parses
/// as a finite float stays numeric; any other column is one-hot encoded with
/// categories sorted lexicographically under names `column=value`. Rows with
/// a missing field (empty or `?`) anywhere are dropped and counted.
pub fn load_csv(path: &Path, label_column: &str) -> Result<LoadReport> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let headers: Vec<String> =
        reader
            .headers()
            .map_err(|e| Error::Data(format!("cannot read {} header: {e}", path.display())))?
            .iter()
            .map(str::to_owned)
            .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            Error::Data(format!(
                "label column {label_column:?} not found; available: {}",
                headers.join(", ")
            ))
        })?;

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| Error::Data(format!("malformed row in {}: {e}", path.display())))?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "row {} has {} fields, header has {}",
                raw_rows.len() + 2,
                record.len(),
                headers.len()
            )));
        }
        raw_rows.push(record.iter().map(str::to_owned).collect());
    }

    let kept: Vec<&Vec<String>> =
        raw_rows.iter().filter(|row| !row.iter().any(|f| is_missing(f))).collect();
    let rows_dropped = raw_rows.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::Data(format!(
            "{}: no usable rows ({} dropped for missing values)",
            path.display(),
            rows_dropped
        )));
    }

    // Classes from the label column, sorted for a stable encoding.
    let class_names: Vec<String> = kept
        .iter()
        .map(|row| row[label_idx].trim().to_owned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if class_names.len() < 2 {
        return Err(Error::Data(format!(
            "label column {label_column:?} has {} distinct value(s); need at least 2",
            class_names.len()
        )));
    }
    let class_of = |v: &str| class_names.iter().position(|c| c == v.trim()).expect("seen value");

    // Per feature column: numeric, or categorical with sorted categories.
    enum Encoding {
        Numeric,
        Categorical(Vec<String>),
    }
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != label_idx).collect();
    let mut encodings = Vec::with_capacity(feature_cols.len());
    let mut feature_names = Vec::new();
    for &c in &feature_cols {
        let numeric = kept.iter().all(|row| parse_numeric(&row[c]).is_some());
        if numeric {
            feature_names.push(headers[c].clone());
            encodings.push(Encoding::Numeric);
        } else {
            let categories: Vec<String> = kept
                .iter()
                .map(|row| row[c].trim().to_owned())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for cat in &categories {
                feature_names.push(format!("{}={}", headers[c], cat));
            }
            encodings.push(Encoding::Categorical(categories));
        }
    }

    let width = feature_names.len();
    let mut data = Vec::with_capacity(kept.len() * width);
    let mut labels = Vec::with_capacity(kept.len());
    for row in &kept {
        labels.push(class_of(&row[label_idx]));
        for (&c, enc) in feature_cols.iter().zip(&encodings) {
            match enc {
                Encoding::Numeric => data.push(parse_numeric(&row[c]).expect("checked numeric")),
                Encoding::Categorical(categories) => {
                    let value = row[c].trim();
                    for cat in categories {
                        data.push(if cat == value { 1.0 } else { 0.0 });
                    }
                }
            }
        }
    }
    let features = Matrix::from_vec(kept.len(), width, data)?;
    let n_classes = class_names.len();
    let dataset = LabeledDataset::new(features, labels, n_classes, feature_names, class_names)?;
    Ok(LoadReport { dataset, rows_dropped })
}

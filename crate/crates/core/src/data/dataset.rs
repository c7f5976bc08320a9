//! Labeled feature matrix with named columns and classes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const FORMAT_HEADER: &str = "mia-dataset v1";

/// Feature matrix plus integer class labels.
///
/// Invariants, checked at construction: one label per row, every label below
/// `n_classes`, at least two classes, and name lists matching the matrix
/// width and class count. Names must not contain tabs or line breaks, since
/// the text format uses them as separators.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<usize>,
    n_classes: usize,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        if n_classes < 2 {
            return Err(Error::Data(format!(
                "need at least two classes, got {n_classes}"
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::Shape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if class_names.len() != n_classes {
            return Err(Error::Shape(format!(
                "{} class names for {n_classes} classes",
                class_names.len()
            )));
        }
        for name in feature_names.iter().chain(&class_names) {
            if name.contains('\t') || name.contains('\n') || name.contains('\r') {
                return Err(Error::Data(format!(
                    "name {name:?} contains a tab or line break"
                )));
            }
        }
        Ok(LabeledDataset { features, labels, n_classes, feature_names, class_names })
    }

    /// Builds a dataset with generated names `x0..` and `class0..`.
    pub fn with_default_names(
        features: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        let feature_names = (0..features.cols()).map(|i| format!("x{i}")).collect();
        let class_names = (0..n_classes).map(|c| format!("class{c}")).collect();
        LabeledDataset::new(features, labels, n_classes, feature_names, class_names)
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Copies the selected rows into a new dataset with the same schema.
    pub fn subset(&self, indices: &[usize]) -> Result<LabeledDataset> {
        let mut data = Vec::with_capacity(indices.len() * self.n_features());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_rows() {
                return Err(Error::Shape(format!("row {i} out of bounds")));
            }
            data.extend_from_slice(self.features.row(i));
            labels.push(self.labels[i]);
        }
        let features = Matrix::from_vec(indices.len(), self.n_features(), data)?;
        LabeledDataset::new(
            features,
            labels,
            self.n_classes,
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Replaces the feature matrix, keeping labels and names. The new matrix
    /// must have the same shape.
    pub fn with_features(&self, features: Matrix) -> Result<LabeledDataset> {
        if features.rows() != self.n_rows() || features.cols() != self.n_features() {
            return Err(Error::Shape(format!(
                "replacement features are {}x{}, expected {}x{}",
                features.rows(),
                features.cols(),
                self.n_rows(),
                self.n_features()
            )));
        }
        LabeledDataset::new(
            features,
            self.labels.clone(),
            self.n_classes,
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Writes a line-oriented text file. Floats use the shortest decimal
    /// form that parses back to the same bits, so the round trip is exact.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io_err = |e| Error::io(path, e);
        writeln!(w, "{FORMAT_HEADER}").map_err(io_err)?;
        writeln!(w, "{} {} {}", self.n_rows(), self.n_features(), self.n_classes)
            .map_err(io_err)?;
        writeln!(w, "{}", self.feature_names.join("\t")).map_err(io_err)?;
        writeln!(w, "{}", self.class_names.join("\t")).map_err(io_err)?;
        for i in 0..self.n_rows() {
            write!(w, "{}", self.labels[i]).map_err(io_err)?;
            for v in self.features.row(i) {
                write!(w, "\t{v}").map_err(io_err)?;
            }
            writeln!(w).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    /// Reads a file written by [`LabeledDataset::save`].
    pub fn load(path: &Path) -> Result<LabeledDataset> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let corrupt =
            |what: &str| Error::Data(format!("bad dataset file {}: {what}", path.display()));
        let mut lines = reader.lines();
        let mut next_line = |what: &str| -> Result<String> {
            match lines.next() {
                Some(Ok(line)) => Ok(line),
                Some(Err(e)) => Err(Error::io(path, e)),
                None => Err(corrupt(&format!("missing {what}"))),
            }
        };

        if next_line("header")? != FORMAT_HEADER {
            return Err(corrupt("unrecognized header"));
        }
        let dims = next_line("dimensions")?;
        let parts: Vec<usize> = dims
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| corrupt("unparseable dimensions")))
            .collect::<Result<_>>()?;
        let [n_rows, n_features, n_classes] = parts[..] else {
            return Err(corrupt("expected three dimensions"));
        };
        let feature_names: Vec<String> =
            next_line("feature names")?.split('\t').map(str::to_owned).collect();
        let class_names: Vec<String> =
            next_line("class names")?.split('\t').map(str::to_owned).collect();

        let mut data = Vec::with_capacity(n_rows * n_features);
        let mut labels = Vec::with_capacity(n_rows);
        for i in 0..n_rows {
            let line = next_line(&format!("row {i}"))?;
            let mut fields = line.split('\t');
            let label: usize = fields
                .next()
                .ok_or_else(|| corrupt(&format!("empty row {i}")))?
                .parse()
                .map_err(|_| corrupt(&format!("bad label in row {i}")))?;
            labels.push(label);
            let start = data.len();
            for field in fields {
                let v: f64 = field
                    .parse()
                    .map_err(|_| corrupt(&format!("bad value in row {i}")))?;
                data.push(v);
            }
            if data.len() - start != n_features {
                return Err(corrupt(&format!(
                    "row {i} has {} values, expected {n_features}",
                    data.len() - start
                )));
            }
        }
        if lines.next().is_some() {
            return Err(corrupt("trailing lines"));
        }
        let features = Matrix::from_vec(n_rows, n_features, data)?;
        LabeledDataset::new(features, labels, n_classes, feature_names, class_names)
    }
}

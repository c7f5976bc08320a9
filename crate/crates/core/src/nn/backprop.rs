//! Manual backpropagation of the mean cross-entropy loss over a mini-batch.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::mlp::{argmax, cross_entropy, softmax, MlpModel};

/// Parameter-shaped container holding one value per model parameter. Used
/// for gradients and for optimizer state buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            weights: model
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: model.biases().iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Multiplies every entry by `s`.
    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w.data_mut() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= s;
            }
        }
    }

    /// `self += other * s`. Shapes must match.
    pub fn add_scaled(&mut self, other: &Gradients, s: f64) {
        for (w, ow) in self.weights.iter_mut().zip(&other.weights) {
            for (v, o) in w.data_mut().iter_mut().zip(ow.data()) {
                *v += o * s;
            }
        }
        for (b, ob) in self.biases.iter_mut().zip(&other.biases) {
            for (v, o) in b.iter_mut().zip(ob) {
                *v += o * s;
            }
        }
    }

    /// Euclidean norm over all entries, treating the gradient as one flat
    /// vector.
    pub fn l2_norm(&self) -> f64 {
        let mut sq = 0.0;
        for w in &self.weights {
            for v in w.data() {
                sq += v * v;
            }
        }
        for b in &self.biases {
            for v in b {
                sq += v * v;
            }
        }
        sq.sqrt()
    }

    pub fn n_entries(&self) -> usize {
        self.weights.iter().map(|w| w.data().len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }
}

/// Gradient plus the batch statistics that fall out of the same pass.
#[derive(Debug)]
pub struct BackwardOutput {
    pub grads: Gradients,
    /// Mean cross-entropy over the batch.
    pub mean_loss: f64,
    /// Number of batch rows whose argmax prediction matches the label.
    pub correct: usize,
}

fn check_batch(
    model: &MlpModel,
    features: &Matrix,
    labels: &[usize],
    batch: &[usize],
) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::Training("empty batch".into()));
    }
    if features.cols() != model.input_size() {
        return Err(Error::Shape(format!(
            "features have {} columns, model expects {}",
            features.cols(),
            model.input_size()
        )));
    }
    if labels.len() != features.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} feature rows",
            labels.len(),
            features.rows()
        )));
    }
    for &i in batch {
        if i >= features.rows() {
            return Err(Error::Shape(format!("batch row {i} out of bounds")));
        }
        if labels[i] >= model.output_size() {
            return Err(Error::Shape(format!(
                "label {} at row {i} exceeds {} classes",
                labels[i],
                model.output_size()
            )));
        }
    }
    Ok(())
}

/// Computes the gradient of the mean cross-entropy loss over the rows of
/// `features` selected by `batch`.
///
/// The output-layer error for one sample is `softmax(logits) - onehot(y)`;
/// errors propagate backward through each hidden layer masked by the ReLU
/// derivative. All per-sample contributions are averaged.
pub fn backward(
    model: &MlpModel,
    features: &Matrix,
    labels: &[usize],
    batch: &[usize],
) -> Result<BackwardOutput> {
    check_batch(model, features, labels, batch)?;
    let mut grads = Gradients::zeros_like(model);
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    let activation = model.config().activation;

    for &i in batch {
        let x = features.row(i);
        let y = labels[i];
        let trace = model.forward_trace(x)?;
        let probs = softmax(&trace.logits);
        total_loss += cross_entropy(&probs, y)?;
        if argmax(&probs) == y {
            correct += 1;
        }

        // dL/dlogits for a single sample.
        let mut delta = probs;
        delta[y] -= 1.0;

        for l in (0..model.n_layers()).rev() {
            let input: &[f64] = if l == 0 { x } else { &trace.hidden[l - 1] };
            let gw = &mut grads.weights[l];
            for (r, &d) in delta.iter().enumerate() {
                for (gv, &a) in gw.row_mut(r).iter_mut().zip(input) {
                    *gv += d * a;
                }
            }
            for (gb, &d) in grads.biases[l].iter_mut().zip(&delta) {
                *gb += d;
            }
            if l > 0 {
                let mut prev = vec![0.0; input.len()];
                model.weights()[l].matvec_transposed(&delta, &mut prev);
                for (p, &a) in prev.iter_mut().zip(input) {
                    *p *= activation.derivative_from_output(a);
                }
                delta = prev;
            }
        }
    }

    let inv = 1.0 / batch.len() as f64;
    grads.scale(inv);
    Ok(BackwardOutput { grads, mean_loss: total_loss * inv, correct })
}

/// Mean cross-entropy loss over the selected rows, no gradient.
pub fn batch_loss(
    model: &MlpModel,
    features: &Matrix,
    labels: &[usize],
    batch: &[usize],
) -> Result<f64> {
    check_batch(model, features, labels, batch)?;
    let mut total = 0.0;
    for &i in batch {
        let probs = model.predict_proba(features.row(i))?;
        total += cross_entropy(&probs, labels[i])?;
    }
    Ok(total / batch.len() as f64)
}

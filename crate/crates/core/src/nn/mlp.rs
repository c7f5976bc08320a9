//! Multilayer perceptron with ReLU hidden layers and a linear output layer.
//!
//! The model stores one weight matrix and one bias vector per layer. Hidden
//! activations are ReLU; the final layer produces raw logits. `softmax` and
//! `cross_entropy` are kept as free functions so scoring code can reuse them.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Probabilities are clamped to at least this value before any logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// Hidden-layer nonlinearity. Only ReLU is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the post-activation value. For ReLU the
    /// output is positive exactly when the pre-activation was.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Architecture and initialization settings for [`MlpModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Layer widths from input to output, e.g. `[11, 64, 32, 2]`.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    /// Seed for weight initialization; two models built from equal configs
    /// have identical parameters.
    pub seed: u64,
}

impl MlpConfig {
    pub fn new(layer_sizes: Vec<usize>, seed: u64) -> Self {
        MlpConfig { layer_sizes, activation: Activation::Relu, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "model needs at least input and output layers, got {} sizes",
                self.layer_sizes.len()
            )));
        }
        if let Some(pos) = self.layer_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Config(format!("layer {pos} has zero width")));
        }
        Ok(())
    }
}

/// Fully materialized network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    config: MlpConfig,
    /// `weights[l]` maps layer `l` activations (cols) to layer `l+1`
    /// pre-activations (rows).
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

impl MlpModel {
    /// Builds a model with Glorot-uniform weights, `U(-b, b)` with
    /// `b = sqrt(6 / (fan_in + fan_out))`, and zero biases. Weights are drawn
    /// in row-major order layer by layer from a ChaCha stream seeded with
    /// `config.seed`, so initialization is reproducible bit for bit.
    pub fn init(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut weights = Vec::with_capacity(config.layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(config.layer_sizes.len() - 1);
        for pair in config.layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new(-bound, bound);
            let mut w = Matrix::zeros(fan_out, fan_in);
            for v in w.data_mut() {
                *v = dist.sample(&mut rng);
            }
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel { config, weights, biases })
    }

    /// Rebuilds a model from explicit parameters, checking shape consistency.
    pub(crate) fn from_parts(
        config: MlpConfig,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        config.validate()?;
        let n_layers = config.layer_sizes.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::Shape(format!(
                "expected {n_layers} layers, got {} weight and {} bias sets",
                weights.len(),
                biases.len()
            )));
        }
        for (l, pair) in config.layer_sizes.windows(2).enumerate() {
            if weights[l].rows() != pair[1] || weights[l].cols() != pair[0] {
                return Err(Error::Shape(format!(
                    "layer {l} weights are {}x{}, expected {}x{}",
                    weights[l].rows(),
                    weights[l].cols(),
                    pair[1],
                    pair[0]
                )));
            }
            if biases[l].len() != pair[1] {
                return Err(Error::Shape(format!(
                    "layer {l} bias has {} entries, expected {}",
                    biases[l].len(),
                    pair[1]
                )));
            }
        }
        Ok(MlpModel { config, weights, biases })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn input_size(&self) -> usize {
        self.config.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.config.layer_sizes.last().expect("validated config")
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    /// Mutable parameter access, e.g. for perturbation-based gradient
    /// checks. Layer shapes are part of the model and must not change.
    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    /// Total number of scalar parameters.
    pub fn n_parameters(&self) -> usize {
        self.weights.iter().map(|w| w.data().len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::Shape(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.input_size()
            )));
        }
        Ok(())
    }

    /// Runs the network, returning `(logits, penultimate)` where
    /// `penultimate` is the post-activation output of the last hidden layer.
    /// With no hidden layers the input itself is the penultimate output.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let activations = self.forward_trace(x)?;
        let penultimate = activations.hidden.last().cloned().unwrap_or_else(|| x.to_vec());
        Ok((activations.logits, penultimate))
    }

    /// Forward pass that keeps every intermediate activation for backprop.
    pub(crate) fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.check_input(x)?;
        let n_hidden = self.n_layers() - 1;
        let mut hidden = Vec::with_capacity(n_hidden);
        let mut current: &[f64] = x;
        for l in 0..n_hidden {
            let mut z = vec![0.0; self.weights[l].rows()];
            self.weights[l].matvec(current, &mut z);
            for (zi, bi) in z.iter_mut().zip(&self.biases[l]) {
                *zi = self.config.activation.apply(*zi + bi);
            }
            hidden.push(z);
            current = hidden.last().expect("just pushed");
        }
        let last = self.n_layers() - 1;
        let mut logits = vec![0.0; self.weights[last].rows()];
        self.weights[last].matvec(current, &mut logits);
        for (zi, bi) in logits.iter_mut().zip(&self.biases[last]) {
            *zi += bi;
        }
        Ok(ForwardTrace { hidden, logits })
    }

    /// Softmax of the logits.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (logits, _) = self.forward(x)?;
        Ok(softmax(&logits))
    }

    /// Index of the most probable class; ties break toward the lower index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let (logits, _) = self.forward(x)?;
        Ok(argmax(&logits))
    }

    /// Penultimate-layer representation used as the sample embedding.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, penultimate) = self.forward(x)?;
        Ok(penultimate)
    }

    /// Fraction of rows in `indices` whose prediction matches the label.
    pub fn accuracy(
        &self,
        features: &Matrix,
        labels: &[usize],
        indices: &[usize],
    ) -> Result<f64> {
        if indices.is_empty() {
            return Err(Error::Data("accuracy over an empty index set".into()));
        }
        let mut correct = 0usize;
        for &i in indices {
            if i >= features.rows() || i >= labels.len() {
                return Err(Error::Shape(format!("row {i} out of bounds")));
            }
            if self.predict(features.row(i))? == labels[i] {
                correct += 1;
            }
        }
        Ok(correct as f64 / indices.len() as f64)
    }
}

/// Intermediate activations from one forward pass.
pub(crate) struct ForwardTrace {
    /// Post-activation outputs of each hidden layer, in order.
    pub hidden: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
}

/// Numerically stable softmax: subtracts the max logit before exponentiating.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Cross-entropy `-ln(p_y)` with the probability clamped to [`PROB_FLOOR`].
pub fn cross_entropy(probs: &[f64], label: usize) -> Result<f64> {
    if label >= probs.len() {
        return Err(Error::Shape(format!(
            "label {label} out of range for {} classes",
            probs.len()
        )));
    }
    Ok(-probs[label].max(PROB_FLOOR).ln())
}

/// First index attaining the maximum value.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

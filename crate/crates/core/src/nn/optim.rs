//! Parameter updates: plain SGD, SGD with (optionally Nesterov) momentum,
//! and Adam, plus the cosine learning-rate schedule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::nn::backprop::Gradients;
use crate::nn::mlp::MlpModel;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Sgdm,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    Cosine,
}

/// Learning rate at `step` out of `total_steps`. The cosine schedule decays
/// from the base rate toward zero: `base * 0.5 * (1 + cos(pi * t / T))`.
pub fn learning_rate(base_lr: f64, schedule: LrSchedule, step: u64, total_steps: u64) -> f64 {
    match schedule {
        LrSchedule::Constant => base_lr,
        LrSchedule::Cosine => {
            if total_steps == 0 {
                return base_lr;
            }
            base_lr * 0.5 * (1.0 + (PI * step as f64 / total_steps as f64).cos())
        }
    }
}

/// Mutable optimizer memory: momentum buffer for SGDM, first and second
/// moment estimates plus a step counter for Adam.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: Optimizer,
    momentum: f64,
    nesterov: bool,
    buf: Option<Gradients>,
    m: Option<Gradients>,
    v: Option<Gradients>,
    steps: u64,
}

impl OptimizerState {
    pub fn new(kind: Optimizer, momentum: f64, nesterov: bool, model: &MlpModel) -> Self {
        let (buf, m, v) = match kind {
            Optimizer::Sgd => (None, None, None),
            Optimizer::Sgdm => (Some(Gradients::zeros_like(model)), None, None),
            Optimizer::Adam => (
                None,
                Some(Gradients::zeros_like(model)),
                Some(Gradients::zeros_like(model)),
            ),
        };
        OptimizerState { kind, momentum, nesterov, buf, m, v, steps: 0 }
    }
}

fn update_params(model: &mut MlpModel, grads: &Gradients, mut f: impl FnMut(&mut f64, f64)) {
    for l in 0..model.n_layers() {
        for (p, &g) in model.weights_mut()[l].data_mut().iter_mut().zip(grads.weights[l].data()) {
            f(p, g);
        }
    }
    for l in 0..model.n_layers() {
        for (p, &g) in model.biases_mut()[l].iter_mut().zip(&grads.biases[l]) {
            f(p, g);
        }
    }
}

fn update_params_with_buf(
    model: &mut MlpModel,
    grads: &Gradients,
    buf: &mut Gradients,
    mut f: impl FnMut(&mut f64, f64, &mut f64),
) {
    for l in 0..model.n_layers() {
        for ((p, &g), b) in model.weights_mut()[l]
            .data_mut()
            .iter_mut()
            .zip(grads.weights[l].data())
            .zip(buf.weights[l].data_mut())
        {
            f(p, g, b);
        }
    }
    for l in 0..model.n_layers() {
        for ((p, &g), b) in model.biases_mut()[l]
            .iter_mut()
            .zip(&grads.biases[l])
            .zip(buf.biases[l].iter_mut())
        {
            f(p, g, b);
        }
    }
}

/// Applies one update with the given learning rate.
///
/// SGDM follows the PyTorch convention: `buf = momentum * buf + grad`, and
/// the applied update is `grad + momentum * buf` under Nesterov, otherwise
/// `buf`. Adam uses betas (0.9, 0.999), epsilon 1e-8, and bias correction
/// with the step count starting at one.
pub fn optimizer_step(
    model: &mut MlpModel,
    state: &mut OptimizerState,
    grads: &Gradients,
    lr: f64,
) {
    match state.kind {
        Optimizer::Sgd => {
            update_params(model, grads, |p, g| *p -= lr * g);
        }
        Optimizer::Sgdm => {
            let mu = state.momentum;
            let nesterov = state.nesterov;
            let buf = state.buf.as_mut().expect("sgdm state holds a buffer");
            update_params_with_buf(model, grads, buf, |p, g, b| {
                *b = mu * *b + g;
                let update = if nesterov { g + mu * *b } else { *b };
                *p -= lr * update;
            });
        }
        Optimizer::Adam => {
            state.steps += 1;
            let bc1 = 1.0 - ADAM_BETA1.powi(state.steps as i32);
            let bc2 = 1.0 - ADAM_BETA2.powi(state.steps as i32);
            // Fold both moment updates into one pass: v is advanced first
            // from inside the closure over (param, grad, m).
            let m = state.m.as_mut().expect("adam state holds moments");
            let v = state.v.as_mut().expect("adam state holds moments");
            for l in 0..model.n_layers() {
                adam_update(
                    model.weights_mut()[l].data_mut(),
                    grads.weights[l].data(),
                    m.weights[l].data_mut(),
                    v.weights[l].data_mut(),
                    lr,
                    bc1,
                    bc2,
                );
            }
            for l in 0..model.n_layers() {
                adam_update(
                    &mut model.biases_mut()[l],
                    &grads.biases[l],
                    m.biases[l].as_mut_slice(),
                    v.biases[l].as_mut_slice(),
                    lr,
                    bc1,
                    bc2,
                );
            }
        }
    }
}

fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

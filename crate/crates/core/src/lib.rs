//! Membership-inference auditing for small tabular classifiers.
//!
//! The crate trains multilayer perceptrons from scratch (manual
//! backpropagation, SGD-family optimizers, optional DP-SGD), splits data
//! into the disjoint roles an audit needs, computes per-sample membership
//! scores with difficulty calibration, runs five attacks over them, and
//! evaluates the results with low-false-positive-rate metrics.
//!
//! Entry points:
//! - [`nn`]: model definition, training, persistence.
//! - [`data`]: CSV ingestion, synthesis, normalization, six-way splits.
//! - [`scores`]: membership and calibrated scores, neighborhood information.
//! - [`attacks`]: threshold, classifier, and likelihood-ratio attacks.
//! - [`metrics`]: ROC/PR curves, AUC, TPR at fixed FPR, balanced accuracy.
//! - [`pipeline`]: seeded end-to-end runs, ablation sweeps, reports.

pub mod attacks;
pub mod data;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod scores;
pub mod seeds;

pub use error::{Error, Result};

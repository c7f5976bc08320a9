//! From-scratch feed-forward network: manual backpropagation, SGD-family
//! optimizers with a cosine schedule, optional differentially private
//! training, and penultimate-layer embeddings.

pub mod backprop;
pub mod dp;
pub mod mlp;
pub mod optim;
pub mod serialize;
pub mod train;

pub use backprop::{backward, batch_loss, BackwardOutput, Gradients};
pub use dp::DpConfig;
pub use mlp::{cross_entropy, softmax, Activation, MlpConfig, MlpModel, PROB_FLOOR};
pub use optim::{learning_rate, optimizer_step, LrSchedule, Optimizer, OptimizerState};
pub use serialize::{load_model, save_model};
pub use train::{train, EpochStats, TrainConfig, TrainHistory};

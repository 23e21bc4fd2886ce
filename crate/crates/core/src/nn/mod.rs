//! A small multilayer perceptron: dense layers, ReLU/sigmoid/softmax,
//! inverted dropout, BCE or class-weighted CCE, SGD or Adam.

mod config;
mod mlp;

pub use config::{Activation, Loss, MlpConfig, Optimizer, TABULAR_HIDDEN};
pub use mlp::{class_from_probability, class_weights, predict, softmax, train, Mlp, MlpTrainer};

//! Training-set reduction toolkit.
//!
//! The crate is organised by concern:
//!
//! * [`data`] holds the labeled dataset model, CSV ingestion, min-max scaling,
//!   train/test splitting and seeded random streams.
//! * [`linalg`] has the numerical kernels the reducers share: distances,
//!   k-means, matrix decompositions and a nonnegative quadratic solver.
//! * [`persistence`] builds Vietoris–Rips filtrations and computes barcodes.
//! * [`reducers`] implements the reduction methods behind one request type.
//! * [`nn`] is a small multilayer perceptron trainer.
//! * [`metrics`] covers ε-representativeness, confusion-matrix metrics and
//!   time/carbon accounting.
//! * [`pipeline`] runs the full reduce/train/evaluate benchmark.

pub mod data;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod persistence;
pub mod pipeline;
pub mod reducers;

pub use data::{LabeledDataset, ScalingParams, SplitSpec};
pub use error::{Error, Result};
pub use reducers::{Method, MethodParams, ReducedDataset, ReductionRequest};


//! The benchmark harness: scale, split, train a baseline, then reduce and
//! retrain for every method and ratio, repeated over several splits.

mod config;
mod run;

pub use config::{DatasetSpec, ExperimentConfig, FesSpec, LossChoice, MethodSpec, ModelSpec, OptimizerChoice};
pub use run::{
    median, ratio_key, run_experiment, run_on_dataset, without_timing, CellError, ExperimentResults, MedianRecord,
    RunRecord,
};

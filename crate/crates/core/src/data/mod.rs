//! Labeled datasets and everything needed to get one ready for reduction:
//! CSV ingestion, min-max scaling, train/test splitting and seeded streams.

mod csv_io;
mod dataset;
pub mod rng;
mod scaling;
mod split;

pub use csv_io::{load_csv, load_csv_with_labels, write_label_mapping, CsvOptions, SOURCE_INDEX_COLUMN};
pub use dataset::{LabeledDataset, Schema};
pub use scaling::{apply_minmax, fit_minmax, ScalingParams};
pub use split::{split_indices, train_test_split, SplitSpec};

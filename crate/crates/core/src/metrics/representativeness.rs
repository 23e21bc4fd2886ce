use ndarray::Array2;
use rayon::prelude::*;

use crate::data::{LabeledDataset, Schema};
use crate::error::{Error, Result};
use crate::linalg::euclidean;
use crate::reducers::ReducedDataset;

/// Smallest `ε` such that every example of `full` has a reduced example of
/// the same class within distance `ε` (reduced rows are compared in the
/// feature space as they are).
pub fn epsilon_representativeness(full: &LabeledDataset, reduced: &ReducedDataset) -> Result<f64> {
    epsilon_core(full, reduced.examples(), reduced.labels())
}

/// Same as [`epsilon_representativeness`] for a reduced set held as a dataset.
pub fn epsilon_between(full: &LabeledDataset, reduced: &LabeledDataset) -> Result<f64> {
    epsilon_core(full, reduced.examples(), reduced.labels())
}

fn epsilon_core(full: &LabeledDataset, red_x: &Array2<f64>, red_labels: &[usize]) -> Result<f64> {
    if red_x.ncols() != full.feature_count() {
        return Err(Error::shape(format!(
            "full data has {} features, reduced data has {}",
            full.feature_count(),
            red_x.ncols()
        )));
    }
    let red_x = red_x.as_standard_layout();
    let mut by_class: Vec<Vec<&[f64]>> = vec![Vec::new(); full.class_count()];
    for (row, &l) in red_x.rows().into_iter().zip(red_labels) {
        if l < by_class.len() {
            by_class[l].push(row.to_slice().expect("standard layout"));
        }
    }
    let schema: &Schema = full.schema();
    let mut eps = 0.0f64;
    for (k, reps) in by_class.iter().enumerate() {
        let members = full.class_indices(k);
        if members.is_empty() {
            continue;
        }
        if reps.is_empty() {
            return Err(Error::Coverage {
                class: schema.label_name(k),
            });
        }
        let worst = members
            .par_iter()
            .map(|&i| {
                let x = full.row(i);
                reps.iter().map(|r| euclidean(x, r)).fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max);
        eps = eps.max(worst);
    }
    Ok(eps)
}

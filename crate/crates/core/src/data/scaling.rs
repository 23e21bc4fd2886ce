use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Per-feature range observed when fitting a min-max scaler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingParams {
    pub fn feature_count(&self) -> usize {
        self.min.len()
    }

    /// Maps each column to `[0, 1]`; constant columns map to 0.
    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range > 0.0 { (*v - self.min[j]) / range } else { 0.0 };
            }
        }
        Ok(out)
    }

    /// Inverse of [`transform`](Self::transform). Constant columns come back as their value.
    pub fn inverse_transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.min[j] + *v * (self.max[j] - self.min[j]);
            }
        }
        Ok(out)
    }

    fn check(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.feature_count() {
            return Err(Error::shape(format!(
                "scaler fitted on {} features, input has {}",
                self.feature_count(),
                x.ncols()
            )));
        }
        Ok(())
    }
}

pub fn fit_minmax(data: &LabeledDataset) -> ScalingParams {
    let d = data.feature_count();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in data.examples().rows() {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    ScalingParams { min, max }
}

pub fn apply_minmax(data: &LabeledDataset, params: &ScalingParams) -> Result<LabeledDataset> {
    let scaled = params.transform(data.examples())?;
    data.with_examples(scaled)
}

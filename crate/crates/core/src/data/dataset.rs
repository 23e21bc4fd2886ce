use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names and the label mapping of a dataset read from (or written to) CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub feature_names: Vec<String>,
    pub label_column: String,
    /// Position of the label column among the retained columns.
    pub label_position: usize,
    /// Raw label string of each class id.
    pub label_names: Vec<String>,
}

impl Schema {
    pub fn synthetic(feature_count: usize, class_count: usize) -> Self {
        Schema {
            feature_names: (0..feature_count).map(|j| format!("x{j}")).collect(),
            label_column: "label".to_string(),
            label_position: feature_count,
            label_names: (0..class_count).map(|k| k.to_string()).collect(),
        }
    }

    pub fn label_name(&self, class: usize) -> String {
        self.label_names
            .get(class)
            .cloned()
            .unwrap_or_else(|| class.to_string())
    }
}

/// Examples in feature space together with their integer class ids.
///
/// Class ids are contiguous in `0..class_count`. A class may have no
/// members (a training split can miss a rare class), but every example
/// appears in exactly one per-class index list.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    examples: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
    class_indices: Vec<Vec<usize>>,
    schema: Schema,
}

impl LabeledDataset {
    pub fn new(examples: Array2<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let schema = Schema::synthetic(examples.ncols(), class_count);
        Self::with_schema(examples, labels, class_count, schema)
    }

    pub fn with_schema(
        examples: Array2<f64>,
        labels: Vec<usize>,
        class_count: usize,
        schema: Schema,
    ) -> Result<Self> {
        let (n, d) = examples.dim();
        if n == 0 {
            return Err(Error::arg("a dataset needs at least one example"));
        }
        if d == 0 {
            return Err(Error::arg("a dataset needs at least one feature"));
        }
        if class_count == 0 {
            return Err(Error::arg("a dataset needs at least one class"));
        }
        if labels.len() != n {
            return Err(Error::shape(format!(
                "{} labels for {} examples",
                labels.len(),
                n
            )));
        }
        if schema.feature_names.len() != d {
            return Err(Error::shape(format!(
                "schema names {} features, matrix has {}",
                schema.feature_names.len(),
                d
            )));
        }
        let mut class_indices = vec![Vec::new(); class_count];
        for (i, &y) in labels.iter().enumerate() {
            if y >= class_count {
                return Err(Error::arg(format!(
                    "label {y} of example {i} is outside 0..{class_count}"
                )));
            }
            class_indices[y].push(i);
        }
        let examples = if examples.is_standard_layout() {
            examples
        } else {
            examples.as_standard_layout().into_owned()
        };
        Ok(LabeledDataset {
            examples,
            labels,
            class_count,
            class_indices,
            schema,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: construction rejects empty datasets.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.examples.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn examples(&self) -> &Array2<f64> {
        &self.examples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Indices of the examples of class `k`, ascending.
    pub fn class_indices(&self, k: usize) -> &[usize] {
        &self.class_indices[k]
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.class_indices.iter().map(Vec::len).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.examples
            .row(i)
            .to_slice()
            .expect("examples are kept in standard layout")
    }

    pub fn row_view(&self, i: usize) -> ArrayView1<'_, f64> {
        self.examples.row(i)
    }

    /// Rows of class `k` as a dense matrix, in ascending index order.
    pub fn class_matrix(&self, k: usize) -> Array2<f64> {
        self.examples.select(Axis(0), &self.class_indices[k])
    }

    /// The sub-dataset made of `indices`, in the given order. Keeps the class
    /// count and schema of `self`.
    pub fn subset(&self, indices: &[usize]) -> Result<LabeledDataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::arg(format!(
                "index {bad} out of range for {} examples",
                self.len()
            )));
        }
        let examples = self.examples.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        LabeledDataset::with_schema(examples, labels, self.class_count, self.schema.clone())
    }

    /// Same labels and schema, different feature values.
    pub fn with_examples(&self, examples: Array2<f64>) -> Result<LabeledDataset> {
        if examples.dim() != self.examples.dim() {
            return Err(Error::shape(format!(
                "replacement matrix is {:?}, dataset is {:?}",
                examples.dim(),
                self.examples.dim()
            )));
        }
        LabeledDataset::with_schema(
            examples,
            self.labels.clone(),
            self.class_count,
            self.schema.clone(),
        )
    }
}

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use super::dataset::{LabeledDataset, Schema};
use crate::error::{Error, Result};

/// Column written next to reduced rows with the index of the source example.
/// Ignored on input, so a reduced file can be read back like any other.
pub const SOURCE_INDEX_COLUMN: &str = "__source_index";

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    pub label_column: String,
    pub drop_columns: Vec<String>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            drop_columns: Vec::new(),
        }
    }

    pub fn drop<I, S>(mut self, columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.drop_columns.extend(columns.into_iter().map(Into::into));
        self
    }
}

/// Reads a headed CSV file. Labels are re-encoded to `0..c` in order of
/// first appearance.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<LabeledDataset> {
    load_csv_with_labels(path, opts, &[])
}

/// Like [`load_csv`], but raw labels listed in `known_labels` keep their
/// position as class id. Labels not listed are appended after them.
pub fn load_csv_with_labels(
    path: impl AsRef<Path>,
    opts: &CsvOptions,
    known_labels: &[String],
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let label_col = headers
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| Error::Schema(format!("label column `{}` not found", opts.label_column)))?;
    for dropped in &opts.drop_columns {
        if !headers.contains(dropped) {
            return Err(Error::Schema(format!("column `{dropped}` to drop not found")));
        }
        if *dropped == opts.label_column {
            return Err(Error::Schema(format!("cannot drop the label column `{dropped}`")));
        }
    }

    let mut feature_cols = Vec::new();
    let mut label_position = 0;
    for (j, h) in headers.iter().enumerate() {
        if j == label_col {
            label_position = feature_cols.len();
        } else if !opts.drop_columns.contains(h) && h != SOURCE_INDEX_COLUMN {
            feature_cols.push(j);
        }
    }
    if feature_cols.is_empty() {
        return Err(Error::Schema("no feature columns left".to_string()));
    }

    let mut label_names: Vec<String> = known_labels.to_vec();
    let mut label_ids: HashMap<String, usize> = label_names
        .iter()
        .enumerate()
        .map(|(k, l)| (l.clone(), k))
        .collect();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::Schema(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for &j in &feature_cols {
            let cell = record[j].trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: headers[j].clone(),
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        let raw = record[label_col].trim().to_string();
        let next = label_names.len();
        let id = *label_ids.entry(raw.clone()).or_insert_with(|| {
            label_names.push(raw);
            next
        });
        labels.push(id);
    }
    if labels.is_empty() {
        return Err(Error::Schema(format!("{} has no data rows", path.display())));
    }

    let examples = Array2::from_shape_vec((labels.len(), feature_cols.len()), values)
        .expect("row-major buffer matches shape");
    let schema = Schema {
        feature_names: feature_cols.iter().map(|&j| headers[j].clone()).collect(),
        label_column: opts.label_column.clone(),
        label_position,
        label_names,
    };
    let c = schema.label_names.len();
    LabeledDataset::with_schema(examples, labels, c, schema)
}

#[derive(Serialize)]
struct LabelMapping<'a> {
    label_column: &'a str,
    labels: &'a [String],
}

/// Writes the class-id → raw-label mapping as JSON.
pub fn write_label_mapping(path: impl AsRef<Path>, schema: &Schema) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(
        file,
        &LabelMapping {
            label_column: &schema.label_column,
            labels: &schema.label_names,
        },
    )?;
    Ok(())
}

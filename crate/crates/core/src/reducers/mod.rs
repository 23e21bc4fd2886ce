//! Training-set reduction methods.
//!
//! Every method takes a [`LabeledDataset`], a ratio `p` and a seed and
//! returns a [`ReducedDataset`]. Per-class methods select
//! `⌊p·|X_k|⌋` examples from each class `k`; the global ones (DES, NRMD,
//! RKM) select `⌊p·N⌋` in total. Randomness is drawn from named streams
//! ("srs/class0", "mms/class3", ...) so results do not depend on how
//! classes are scheduled across threads.

mod clc;
mod des;
mod fes;
mod mms;
mod nrmd;
mod phl;
mod prd;
mod srs;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, Schema, SOURCE_INDEX_COLUMN};
use crate::error::{Error, Result};
use crate::linalg::DecompositionKind;
use crate::persistence::OutliernessMode;

pub use clc::{reduce_clc, reduce_rkm};
pub use des::{distance_entropy, reduce_des};
pub use fes::{forgetting_events, reduce_fes, EpochTrainer, FesOutcome, ForgetCount, ForgettingTracker};
pub use mms::reduce_mms;
pub use nrmd::{matrix_scores, reduce_nrmd};
pub use phl::{phl_scores, reduce_phl, LandmarkType};
pub use prd::{auto_bandwidth, protodash, reduce_prd, rbf_kernel, ProtoDash};
pub use srs::reduce_srs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Srs,
    Prd,
    Clc,
    Rkm,
    Mms,
    Des,
    Phl,
    Nrmd,
    Fes,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Srs,
        Method::Prd,
        Method::Clc,
        Method::Rkm,
        Method::Mms,
        Method::Des,
        Method::Phl,
        Method::Nrmd,
        Method::Fes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Srs => "SRS",
            Method::Prd => "PRD",
            Method::Clc => "CLC",
            Method::Rkm => "RKM",
            Method::Mms => "MMS",
            Method::Des => "DES",
            Method::Phl => "PHL",
            Method::Nrmd => "NRMD",
            Method::Fes => "FES",
        }
    }

    /// FES needs a model in training and cannot run through [`reduce`].
    pub fn is_wrapper(self) -> bool {
        self == Method::Fes
    }

    /// True if the output rows are copies of training examples.
    pub fn is_subset(self) -> bool {
        self != Method::Clc
    }

    /// Number of rows the method returns for `data` at ratio `p`.
    pub fn expected_size(self, data: &LabeledDataset, p: f64) -> usize {
        match self {
            Method::Des | Method::Nrmd | Method::Rkm => target_size(data.len(), p),
            _ => data
                .class_sizes()
                .into_iter()
                .map(|n| target_size(n, p))
                .sum(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::arg(format!("unknown reduction method `{s}`")))
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Method-specific settings. Each method reads only its own fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodParams {
    /// RBF bandwidth for PRD; `None` uses the median pairwise distance of each class.
    pub kernel_bandwidth: Option<f64>,
    /// Base-data ratio for DES; `None` means `p / 2`.
    pub p_base: Option<f64>,
    /// Neighbourhood radius for PHL, also the top of its Rips filtration.
    pub delta: f64,
    pub outlierness: OutliernessMode,
    pub landmark: LandmarkType,
    pub decomposition: DecompositionKind,
    pub e_initial: usize,
    pub e_total: usize,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            kernel_bandwidth: None,
            p_base: None,
            delta: 0.1,
            outlierness: OutliernessMode::Restricted,
            landmark: LandmarkType::Representative,
            decomposition: DecompositionKind::Svd,
            e_initial: 50,
            e_total: 150,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionRequest {
    pub method: Method,
    pub ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub params: MethodParams,
}

impl ReductionRequest {
    pub fn new(method: Method, ratio: f64, seed: u64) -> Self {
        ReductionRequest {
            method,
            ratio,
            seed,
            params: MethodParams::default(),
        }
    }

    pub fn with_params(mut self, params: MethodParams) -> Self {
        self.params = params;
        self
    }

    /// Checks the ratio and the parameters the chosen method uses.
    pub fn validate(&self) -> Result<()> {
        check_ratio(self.ratio)?;
        let p = &self.params;
        match self.method {
            Method::Prd => {
                if let Some(h) = p.kernel_bandwidth {
                    check_bandwidth(h)?;
                }
            }
            Method::Des => {
                let base = p.p_base.unwrap_or(self.ratio / 2.0);
                check_p_base(base, self.ratio)?;
            }
            Method::Phl => check_delta(p.delta)?,
            Method::Fes => check_epochs(p.e_initial, p.e_total)?,
            _ => {}
        }
        Ok(())
    }
}

/// Output of a reduction: a matrix of rows with their class ids and, for
/// subset methods, the training-set index each row was copied from.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDataset {
    examples: Array2<f64>,
    labels: Vec<usize>,
    selected_indices: Option<Vec<usize>>,
    class_count: usize,
    schema: Schema,
}

impl ReducedDataset {
    /// Rows `indices` of `data`, in the given order.
    pub fn from_indices(data: &LabeledDataset, indices: Vec<usize>) -> Self {
        ReducedDataset {
            examples: data.examples().select(Axis(0), &indices),
            labels: indices.iter().map(|&i| data.labels()[i]).collect(),
            selected_indices: Some(indices),
            class_count: data.class_count(),
            schema: data.schema().clone(),
        }
    }

    /// Synthetic rows (no source indices).
    pub fn synthetic(data: &LabeledDataset, examples: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if examples.nrows() != labels.len() {
            return Err(Error::shape(format!(
                "{} labels for {} rows",
                labels.len(),
                examples.nrows()
            )));
        }
        if examples.ncols() != data.feature_count() {
            return Err(Error::shape(format!(
                "synthetic rows have {} features, dataset has {}",
                examples.ncols(),
                data.feature_count()
            )));
        }
        Ok(ReducedDataset {
            examples,
            labels,
            selected_indices: None,
            class_count: data.class_count(),
            schema: data.schema().clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn examples(&self) -> &Array2<f64> {
        &self.examples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn selected_indices(&self) -> Option<&[usize]> {
        self.selected_indices.as_deref()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// The reduced rows as a dataset to train on.
    pub fn to_dataset(&self) -> Result<LabeledDataset> {
        LabeledDataset::with_schema(
            self.examples.as_standard_layout().to_owned(),
            self.labels.clone(),
            self.class_count,
            self.schema.clone(),
        )
    }

    /// Writes the rows with the original header plus a source-index column,
    /// which is left empty for synthetic rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_to(&mut out)?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let s = &self.schema;
        let mut header: Vec<&str> = s.feature_names.iter().map(String::as_str).collect();
        header.insert(s.label_position.min(header.len()), &s.label_column);
        header.push(SOURCE_INDEX_COLUMN);
        w.write_record(&header)?;
        for (i, row) in self.examples.rows().into_iter().enumerate() {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.insert(s.label_position.min(record.len()), s.label_name(self.labels[i]));
            record.push(
                self.selected_indices
                    .as_ref()
                    .map(|idx| idx[i].to_string())
                    .unwrap_or_default(),
            );
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))
    }
}

/// Runs a non-wrapper method. FES goes through [`reduce_fes`].
pub fn reduce(data: &LabeledDataset, request: &ReductionRequest) -> Result<ReducedDataset> {
    request.validate()?;
    let (p, seed, params) = (request.ratio, request.seed, &request.params);
    match request.method {
        Method::Srs => Ok(reduce_srs(data, p, seed)),
        Method::Prd => reduce_prd(data, p, seed, params.kernel_bandwidth),
        Method::Clc => reduce_clc(data, p, seed),
        Method::Rkm => reduce_rkm(data, p, seed),
        Method::Mms => Ok(reduce_mms(data, p, seed)),
        Method::Des => reduce_des(data, p, params.p_base.unwrap_or(p / 2.0), seed),
        Method::Phl => reduce_phl(data, p, params.delta, params.outlierness, params.landmark, seed),
        Method::Nrmd => reduce_nrmd(data, p, params.decomposition, seed),
        Method::Fes => Err(Error::arg(
            "FES selects examples while a model trains; use reduce_fes with a trainer",
        )),
    }
}

/// `⌊p·n⌋`, robust to ratios such as 0.29 that are not exact in binary.
pub fn target_size(n: usize, p: f64) -> usize {
    (((p * n as f64) + 1e-9).floor() as usize).min(n)
}

pub(crate) fn check_ratio(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("ratio must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("kernel bandwidth must be positive, got {h}")));
    }
    Ok(())
}

fn check_p_base(p_base: f64, p: f64) -> Result<()> {
    if !(0.0..=p).contains(&p_base) {
        return Err(Error::arg(format!("p_base must lie in [0, p={p}], got {p_base}")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::arg(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

pub(crate) fn check_epochs(e_initial: usize, e_total: usize) -> Result<()> {
    if e_initial < 1 || e_initial >= e_total {
        return Err(Error::arg(format!(
            "FES needs 1 <= e_initial < e_total, got {e_initial} and {e_total}"
        )));
    }
    Ok(())
}

/// Runs `select` on every nonempty class in parallel and concatenates the
/// selections in class order. `select` gets the class id, the class's
/// (ascending) training indices and its target size.
pub(crate) fn per_class<F>(data: &LabeledDataset, p: f64, method: Method, select: F) -> Result<Vec<usize>>
where
    F: Fn(usize, &[usize], usize) -> Result<Vec<usize>> + Sync,
{
    let parts: Vec<Vec<usize>> = (0..data.class_count())
        .into_par_iter()
        .map(|k| {
            let members = data.class_indices(k);
            if members.is_empty() {
                log::warn!("{method}: class {} has no training examples", data.schema().label_name(k));
                return Ok(Vec::new());
            }
            let n_k = target_size(members.len(), p);
            if n_k == 0 {
                log::warn!(
                    "{method}: ratio {p} selects nothing from class {} ({} examples)",
                    data.schema().label_name(k),
                    members.len()
                );
                return Ok(Vec::new());
            }
            select(k, members, n_k)
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// The `n` candidates with the highest (or lowest) scores, ties going to
/// the lowest index. Returned in rank order.
pub(crate) fn top_n(candidates: &[usize], scores: &[f64], n: usize, highest: bool) -> Vec<usize> {
    let mut order: Vec<usize> = candidates.to_vec();
    order.sort_by(|&a, &b| {
        let ord = scores[a].total_cmp(&scores[b]);
        let ord = if highest { ord.reverse() } else { ord };
        ord.then(a.cmp(&b))
    });
    order.truncate(n);
    order
}

/// Indices of `0..n` not in `taken`, ascending.
pub(crate) fn complement(n: usize, taken: &[usize]) -> Vec<usize> {
    let taken: HashSet<usize> = taken.iter().copied().collect();
    (0..n).filter(|i| !taken.contains(i)).collect()
}

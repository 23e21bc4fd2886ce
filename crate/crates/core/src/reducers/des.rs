use ndarray::Array1;
use rayon::prelude::*;

use super::srs::srs_indices;
use super::{check_p_base, check_ratio, complement, target_size, top_n, ReducedDataset};
use crate::data::LabeledDataset;
use crate::error::Result;
use crate::linalg::euclidean;

/// Entropy (base 2) of the softmax of `distances`.
pub fn distance_entropy(distances: &[f64]) -> f64 {
    let max = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = distances.iter().map(|&d| (d - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter()
        .map(|&e| e / total)
        .filter(|&s| s > 0.0)
        .map(|s| -s * s.log2())
        .sum()
}

/// Distance-entropy selection: a stratified random base of ratio `p_base`,
/// topped up with the pool examples whose distances to the class
/// prototypes (base means) have the highest softmax entropy.
pub fn reduce_des(data: &LabeledDataset, p: f64, p_base: f64, seed: u64) -> Result<ReducedDataset> {
    check_ratio(p)?;
    check_p_base(p_base, p)?;
    let base = srs_indices(data, p_base, seed, "des/base");

    let d = data.feature_count();
    let mut sums = vec![Array1::<f64>::zeros(d); data.class_count()];
    let mut counts = vec![0usize; data.class_count()];
    for &i in &base {
        let k = data.labels()[i];
        sums[k] += &data.row_view(i);
        counts[k] += 1;
    }
    let prototypes: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| (s / c as f64).to_vec())
        .collect();
    if prototypes.len() < counts.len() {
        log::warn!(
            "DES: base data covers {} of {} classes; entropy uses those prototypes only",
            prototypes.len(),
            counts.len()
        );
    }

    let pool = complement(data.len(), &base);
    let mut entropy = vec![0.0; data.len()];
    let scored: Vec<(usize, f64)> = pool
        .par_iter()
        .map(|&i| {
            let dists: Vec<f64> = prototypes.iter().map(|c| euclidean(data.row(i), c)).collect();
            (i, if dists.is_empty() { 0.0 } else { distance_entropy(&dists) })
        })
        .collect();
    for (i, e) in scored {
        entropy[i] = e;
    }

    let n_add = target_size(data.len(), p) - base.len();
    let mut selected = base;
    selected.extend(top_n(&pool, &entropy, n_add, true));
    Ok(ReducedDataset::from_indices(data, selected))
}

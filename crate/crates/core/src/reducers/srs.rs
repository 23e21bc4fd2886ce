use rand::seq::index;

use super::{per_class, Method, ReducedDataset};
use crate::data::{rng, LabeledDataset};

/// Stratified random sampling: `⌊p·|X_k|⌋` examples drawn uniformly
/// without replacement from each class.
pub fn reduce_srs(data: &LabeledDataset, p: f64, seed: u64) -> ReducedDataset {
    ReducedDataset::from_indices(data, srs_indices(data, p, seed, "srs"))
}

pub(crate) fn srs_indices(data: &LabeledDataset, p: f64, seed: u64, prefix: &str) -> Vec<usize> {
    per_class(data, p, Method::Srs, |k, members, n_k| {
        let mut r = rng::stream(seed, &format!("{prefix}/class{k}"));
        let mut picked: Vec<usize> = index::sample(&mut r, members.len(), n_k)
            .into_iter()
            .map(|i| members[i])
            .collect();
        picked.sort_unstable();
        Ok(picked)
    })
    .expect("sampling cannot fail")
}

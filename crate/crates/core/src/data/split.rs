use rand::seq::index::sample;

use super::dataset::LabeledDataset;
use super::rng;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub test_proportion: f64,
    pub seed: u64,
    /// Allocate the test set per class (largest-remainder quotas) instead of
    /// drawing it uniformly from the whole dataset.
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(test_proportion: f64, seed: u64) -> Result<Self> {
        if !(test_proportion > 0.0 && test_proportion < 1.0) {
            return Err(Error::arg(format!(
                "test proportion must lie in (0, 1), got {test_proportion}"
            )));
        }
        Ok(SplitSpec {
            test_proportion,
            seed,
            stratified: false,
        })
    }

    pub fn stratified(mut self, on: bool) -> Self {
        self.stratified = on;
        self
    }

    pub fn test_size(&self, n: usize) -> usize {
        (self.test_proportion * n as f64).floor() as usize
    }
}

/// Returns `(train, test)` index lists, each ascending. `|test| = ⌊p_test·N⌋`.
pub fn split_indices(data: &LabeledDataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.test_proportion > 0.0 && spec.test_proportion < 1.0) {
        return Err(Error::arg(format!(
            "test proportion must lie in (0, 1), got {}",
            spec.test_proportion
        )));
    }
    let n = data.len();
    let n_test = spec.test_size(n);
    if n_test == 0 || n_test == n {
        return Err(Error::arg(format!(
            "test proportion {} on {n} examples gives a test set of {n_test}",
            spec.test_proportion
        )));
    }

    let mut is_test = vec![false; n];
    if spec.stratified {
        for (k, quota) in stratified_quotas(&data.class_sizes(), spec.test_proportion, n_test)
            .into_iter()
            .enumerate()
        {
            let members = data.class_indices(k);
            let mut r = rng::stream(spec.seed, &format!("split/class{k}"));
            for pick in sample(&mut r, members.len(), quota) {
                is_test[members[pick]] = true;
            }
        }
    } else {
        let mut r = rng::stream(spec.seed, "split");
        for pick in sample(&mut r, n, n_test) {
            is_test[pick] = true;
        }
    }

    let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| is_test[i]);
    Ok((train, test))
}

/// Floor quotas per class, topped up by largest fractional part (lowest
/// class id on ties) until they sum to `total`.
fn stratified_quotas(sizes: &[usize], p: f64, total: usize) -> Vec<usize> {
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| (p * s as f64).floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let frac = |k: usize| p * sizes[k] as f64 - quotas[k] as f64;
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    let mut missing = total.saturating_sub(quotas.iter().sum());
    for &k in order.iter().cycle().take(sizes.len() * 2) {
        if missing == 0 {
            break;
        }
        if quotas[k] < sizes[k] {
            quotas[k] += 1;
            missing -= 1;
        }
    }
    quotas
}

pub fn train_test_split(
    data: &LabeledDataset,
    spec: &SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(data, spec)?;
    Ok((data.subset(&train)?, data.subset(&test)?))
}

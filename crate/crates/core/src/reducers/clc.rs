use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::{target_size, ReducedDataset};
use crate::data::{rng, LabeledDataset};
use crate::error::Result;
use crate::linalg::{kmeans, squared_euclidean, DEFAULT_MAX_ITERS, DEFAULT_TOL};

/// Replaces each class by the `⌊p·|X_k|⌋` centroids of a k-means run on it.
/// Rows are synthetic, ordered by class and then by cluster id.
pub fn reduce_clc(data: &LabeledDataset, p: f64, seed: u64) -> Result<ReducedDataset> {
    let d = data.feature_count();
    let parts: Vec<(usize, Array2<f64>)> = (0..data.class_count())
        .into_par_iter()
        .map(|k| {
            let size = data.class_indices(k).len();
            let n_k = target_size(size, p);
            if n_k == 0 {
                if size == 0 {
                    log::warn!("CLC: class {} has no training examples", data.schema().label_name(k));
                }
                return Ok((k, Array2::zeros((0, d))));
            }
            let x = data.class_matrix(k);
            let fit = kmeans(
                &x,
                n_k,
                rng::derive_seed(seed, &format!("clc/class{k}")),
                DEFAULT_MAX_ITERS,
                DEFAULT_TOL,
            )?;
            Ok((k, fit.centroids))
        })
        .collect::<Result<_>>()?;

    let mut labels = Vec::new();
    let views: Vec<_> = parts
        .iter()
        .map(|(k, c)| {
            labels.extend(std::iter::repeat_n(*k, c.nrows()));
            c.view()
        })
        .collect();
    let examples = ndarray::concatenate(Axis(0), &views).expect("centroids share the feature count");
    ReducedDataset::synthetic(data, examples, labels)
}

/// Runs k-means with one cluster per class on the whole training set and
/// keeps the `⌊p·N⌋` real examples closest to the centroids, taking the
/// nearest remaining member of each cluster in turn.
pub fn reduce_rkm(data: &LabeledDataset, p: f64, seed: u64) -> Result<ReducedDataset> {
    let n = data.len();
    let target = target_size(n, p);
    let k = data.class_count().min(n);
    let fit = kmeans(
        data.examples(),
        k,
        rng::derive_seed(seed, "rkm"),
        DEFAULT_MAX_ITERS,
        DEFAULT_TOL,
    )?;

    let mut ranked: Vec<Vec<(f64, usize)>> = vec![Vec::new(); k];
    for i in 0..n {
        let c = fit.assignments[i];
        let centroid = fit.centroids.row(c);
        let d = squared_euclidean(data.row(i), centroid.as_slice().expect("standard layout"));
        ranked[c].push((d, i));
    }
    for members in &mut ranked {
        members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }

    let mut selected = Vec::with_capacity(target);
    let mut rank = 0;
    while selected.len() < target {
        for members in &ranked {
            if selected.len() == target {
                break;
            }
            if let Some(&(_, i)) = members.get(rank) {
                selected.push(i);
            }
        }
        rank += 1;
    }
    Ok(ReducedDataset::from_indices(data, selected))
}

use ndarray::Array2;

use super::{check_bandwidth, per_class, Method, ReducedDataset};
use crate::data::LabeledDataset;
use crate::error::Result;
use crate::linalg::{distance_matrix, quadratic_objective, ActiveSetSolver};

/// Result of the greedy prototype search on one matrix.
#[derive(Clone, Debug)]
pub struct ProtoDash {
    /// Selected row indices in the order they were added.
    pub selected: Vec<usize>,
    /// Optimal nonnegative weights on the selected rows (zero elsewhere).
    pub weights: Vec<f64>,
    /// `l(w)` after each addition.
    pub objective_history: Vec<f64>,
}

/// Gaussian kernel `exp(−‖a−b‖² / (2h²))` between all rows of `points`.
pub fn rbf_kernel(points: &Array2<f64>, bandwidth: f64) -> Array2<f64> {
    let d = distance_matrix(points);
    let denom = 2.0 * bandwidth * bandwidth;
    d.mapv(|v| (-(v * v) / denom).exp())
}

/// Median of the pairwise distances between distinct rows; 1 when that is
/// zero or there is only one row.
pub fn auto_bandwidth(points: &Array2<f64>) -> f64 {
    let n = points.nrows();
    let d = distance_matrix(points);
    let mut all: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| d[[i, j]])
        .collect();
    if all.is_empty() {
        return 1.0;
    }
    all.sort_by(f64::total_cmp);
    let m = all.len();
    let median = if m % 2 == 1 {
        all[m / 2]
    } else {
        0.5 * (all[m / 2 - 1] + all[m / 2])
    };
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

/// Greedily picks `m` rows of `points` whose weighted kernel mean best
/// matches that of all rows.
///
/// Each step adds the unselected index with the largest gradient
/// `μ − Kw` and re-solves the nonnegative weight problem on the enlarged
/// set, starting from the previous optimum.
pub fn protodash(points: &Array2<f64>, m: usize, bandwidth: f64) -> Result<ProtoDash> {
    check_bandwidth(bandwidth)?;
    let n = points.nrows();
    let m = m.min(n);
    let k = rbf_kernel(&points.as_standard_layout().to_owned(), bandwidth);
    let mu: Vec<f64> = (0..n)
        .map(|j| k.column(j).sum() / n as f64)
        .collect();

    let mut solver = ActiveSetSolver::new(&mu, &k);
    let mut chosen = vec![false; n];
    let mut selected = Vec::with_capacity(m);
    let mut objective_history = Vec::with_capacity(m);
    for _ in 0..m {
        let w = solver.weights();
        let positive: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !chosen[j]) {
            let g = mu[j] - positive.iter().map(|&i| k[[j, i]] * w[i]).sum::<f64>();
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((j, g));
            }
        }
        let (j0, _) = best.expect("fewer selections than rows");
        chosen[j0] = true;
        selected.push(j0);
        solver.add_to_support(j0);
        solver.solve();
        objective_history.push(quadratic_objective(&mu, &k, solver.weights()));
    }
    Ok(ProtoDash {
        selected,
        weights: solver.weights().to_vec(),
        objective_history,
    })
}

/// ProtoDash selection run on each class separately.
pub fn reduce_prd(data: &LabeledDataset, p: f64, _seed: u64, bandwidth: Option<f64>) -> Result<ReducedDataset> {
    if let Some(h) = bandwidth {
        check_bandwidth(h)?;
    }
    let indices = per_class(data, p, Method::Prd, |k, members, n_k| {
        let x = data.class_matrix(k);
        let h = bandwidth.unwrap_or_else(|| auto_bandwidth(&x));
        let found = protodash(&x, n_k, h)?;
        Ok(found.selected.into_iter().map(|i| members[i]).collect())
    })?;
    Ok(ReducedDataset::from_indices(data, indices))
}

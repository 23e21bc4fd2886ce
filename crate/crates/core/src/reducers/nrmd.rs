use ndarray::{concatenate, Array2, Axis};
use rayon::prelude::*;

use super::{check_ratio, target_size, top_n, ReducedDataset};
use crate::data::{rng, LabeledDataset};
use crate::error::Result;
use crate::linalg::{decompose, DecompositionKind};

const COS_FLOOR: f64 = 1e-12;
const EIGEN_FLOOR: f64 = 1e-12;

fn normalize_rows(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.to_owned();
    for mut row in out.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

/// Score of each row of `a` from its similarity to the rows of `V` in a
/// factorisation `a = U·V`: `−ln(max(|cos(a_i, v_j)|, ε))` averaged with
/// weights `w_j`.
pub fn matrix_scores(a: &Array2<f64>, kind: DecompositionKind, seed: u64) -> Result<Vec<f64>> {
    let dec = decompose(a, kind, seed)?;
    let r = dec.rank();
    let weights: Vec<f64> = match &dec.eigenvalues {
        Some(lambda) => {
            let inv: Vec<f64> = lambda.iter().map(|&l| 1.0 / l.max(EIGEN_FLOOR)).collect();
            let total: f64 = inv.iter().sum();
            inv.into_iter().map(|v| v / total).collect()
        }
        None => (1..=r)
            .map(|i| 2.0 * i as f64 / (r * (r + 1)) as f64)
            .collect(),
    };
    let cos = normalize_rows(a).dot(&normalize_rows(&dec.v).t());
    Ok(cos
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(&weights)
                .map(|(&c, &w)| -c.abs().max(COS_FLOOR).ln() * w)
                .sum()
        })
        .collect())
}

/// Numerosity reduction by matrix decomposition: the product of per-class
/// scores and scores on features joined with the one-hot labels, keeping
/// the `⌊p·N⌋` highest overall.
pub fn reduce_nrmd(data: &LabeledDataset, p: f64, kind: DecompositionKind, seed: u64) -> Result<ReducedDataset> {
    check_ratio(p)?;
    let n = data.len();
    let mut class_scores = vec![0.0; n];
    let parts: Vec<(usize, Vec<f64>)> = (0..data.class_count())
        .into_par_iter()
        .filter(|&k| !data.class_indices(k).is_empty())
        .map(|k| {
            let s = matrix_scores(
                &data.class_matrix(k),
                kind,
                rng::derive_seed(seed, &format!("nrmd/class{k}")),
            )?;
            Ok((k, s))
        })
        .collect::<Result<_>>()?;
    for (k, s) in parts {
        for (&i, v) in data.class_indices(k).iter().zip(s) {
            class_scores[i] = v;
        }
    }

    let onehot = Array2::from_shape_fn((n, data.class_count()), |(i, j)| {
        if data.labels()[i] == j {
            1.0
        } else {
            0.0
        }
    });
    let joined = concatenate(Axis(1), &[data.examples().view(), onehot.view()]).expect("same row count");
    let global = matrix_scores(&joined, kind, rng::derive_seed(seed, "nrmd/global"))?;

    let score: Vec<f64> = class_scores.iter().zip(&global).map(|(a, b)| a * b).collect();
    let all: Vec<usize> = (0..n).collect();
    let selected = top_n(&all, &score, target_size(n, p), true);
    Ok(ReducedDataset::from_indices(data, selected))
}

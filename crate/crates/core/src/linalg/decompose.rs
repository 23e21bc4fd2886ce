//! Factorisations `A = U V` with `U: n×r`, `V: r×d`, `r = min(n, d)`.

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::rng;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionKind {
    Svd,
    Nmf,
    Plu,
    Qr,
}

impl DecompositionKind {
    pub fn name(self) -> &'static str {
        match self {
            DecompositionKind::Svd => "svd",
            DecompositionKind::Nmf => "nmf",
            DecompositionKind::Plu => "plu",
            DecompositionKind::Qr => "qr",
        }
    }
}

impl std::str::FromStr for DecompositionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svd" => Ok(DecompositionKind::Svd),
            "nmf" => Ok(DecompositionKind::Nmf),
            "plu" | "lu" => Ok(DecompositionKind::Plu),
            "qr" => Ok(DecompositionKind::Qr),
            other => Err(Error::arg(format!("unknown decomposition `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub kind: DecompositionKind,
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    /// Singular values, nonincreasing. Only set for SVD.
    pub eigenvalues: Option<Vec<f64>>,
}

impl Decomposition {
    pub fn rank(&self) -> usize {
        self.v.nrows()
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        self.u.dot(&self.v)
    }
}

const NMF_MAX_ITERS: usize = 500;

/// Factorises `a`. For SVD, `u` carries the singular values (`U·Σ`) and the
/// rows of `v` are the right singular vectors; `seed` only matters for NMF.
pub fn decompose(a: &Array2<f64>, kind: DecompositionKind, seed: u64) -> Result<Decomposition> {
    let (n, d) = a.dim();
    if n == 0 || d == 0 {
        return Err(Error::arg("cannot decompose an empty matrix"));
    }
    let r = n.min(d);
    let m = DMatrix::from_fn(n, d, |i, j| a[[i, j]]);

    match kind {
        DecompositionKind::Svd => {
            let svd = m.svd(true, true);
            let u = svd.u.expect("requested U");
            let vt = svd.v_t.expect("requested V^T");
            let mut order: Vec<usize> = (0..r).collect();
            order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
            let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k].max(0.0)).collect();
            let u_out = Array2::from_shape_fn((n, r), |(i, k)| u[(i, order[k])] * sigma[k]);
            let v_out = Array2::from_shape_fn((r, d), |(k, j)| vt[(order[k], j)]);
            Ok(Decomposition {
                kind,
                u: u_out,
                v: v_out,
                eigenvalues: Some(sigma),
            })
        }
        DecompositionKind::Qr => {
            let qr = m.qr();
            let q = qr.q();
            let rr = qr.r();
            Ok(Decomposition {
                kind,
                u: to_ndarray(&q),
                v: to_ndarray(&rr),
                eigenvalues: None,
            })
        }
        DecompositionKind::Plu => {
            // P·A = L·U, so A = Pᵀ·L·U.
            let (p, mut l, upper) = m.lu().unpack();
            p.inv_permute_rows(&mut l);
            Ok(Decomposition {
                kind,
                u: to_ndarray(&l),
                v: to_ndarray(&upper),
                eigenvalues: None,
            })
        }
        DecompositionKind::Nmf => {
            let f = nmf(a, r, seed, NMF_MAX_ITERS)?;
            Ok(Decomposition {
                kind,
                u: f.w,
                v: f.h,
                eigenvalues: None,
            })
        }
    }
}

fn to_ndarray(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn(m.shape(), |(i, j)| m[(i, j)])
}

#[derive(Clone, Debug)]
pub struct NmfResult {
    pub w: Array2<f64>,
    pub h: Array2<f64>,
    /// Frobenius residual `‖A − WH‖` after each (H, W) update pair.
    pub residual_history: Vec<f64>,
}

/// Nonnegative factorisation by Lee–Seung multiplicative updates.
pub fn nmf(a: &Array2<f64>, rank: usize, seed: u64, max_iters: usize) -> Result<NmfResult> {
    let (n, d) = a.dim();
    if rank == 0 {
        return Err(Error::arg("NMF rank must be positive"));
    }
    if let Some(v) = a.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::arg(format!("NMF needs a nonnegative matrix, found entry {v}")));
    }
    const EPS: f64 = 1e-12;

    let mean = a.sum() / (n * d) as f64;
    let scale = (mean / rank as f64).sqrt();
    let mut r = rng::stream(seed, "nmf-init");
    let mut w = Array2::from_shape_simple_fn((n, rank), || scale * r.random::<f64>());
    let mut h = Array2::from_shape_simple_fn((rank, d), || scale * r.random::<f64>());

    let norm_a = frobenius(a);
    let mut residual_history = Vec::with_capacity(max_iters);
    for _ in 0..max_iters {
        let wt_a = w.t().dot(a);
        let wt_w_h = w.t().dot(&w).dot(&h);
        h.zip_mut_with(&wt_a, |hv, &num| *hv *= num);
        h.zip_mut_with(&wt_w_h, |hv, &den| *hv /= den + EPS);

        let a_ht = a.dot(&h.t());
        let w_h_ht = w.dot(&h.dot(&h.t()));
        w.zip_mut_with(&a_ht, |wv, &num| *wv *= num);
        w.zip_mut_with(&w_h_ht, |wv, &den| *wv /= den + EPS);

        let res = frobenius(&(a - &w.dot(&h)));
        let stalled = residual_history
            .last()
            .is_some_and(|&prev: &f64| prev - res <= 1e-14 * norm_a.max(1.0));
        residual_history.push(res);
        if res <= 1e-14 * norm_a || stalled {
            break;
        }
    }
    Ok(NmfResult {
        w,
        h,
        residual_history,
    })
}

pub(crate) fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

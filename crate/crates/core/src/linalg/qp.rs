//! Maximisation of `l(w) = wᵀμ − ½ wᵀKw` over `w ≥ 0` with `w` restricted
//! to a support set.
//!
//! Solved with a primal active-set method: the unconstrained optimum on the
//! current positive set comes from a Cholesky factor of `K_PP` that is
//! extended one column at a time, and the iterate backtracks along the
//! segment towards it whenever a coordinate would turn negative. Each step
//! moves along a direction of ascent of a concave quadratic, so the
//! objective never decreases.

use ndarray::Array2;

use crate::error::{Error, Result};

/// `wᵀμ − ½ wᵀKw`.
pub fn quadratic_objective(mu: &[f64], k: &Array2<f64>, w: &[f64]) -> f64 {
    let n = mu.len();
    let mut lin = 0.0;
    let mut quad = 0.0;
    for i in 0..n {
        if w[i] == 0.0 {
            continue;
        }
        lin += w[i] * mu[i];
        let mut row = 0.0;
        for j in 0..n {
            if w[j] != 0.0 {
                row += k[[i, j]] * w[j];
            }
        }
        quad += w[i] * row;
    }
    lin - 0.5 * quad
}

/// Returns the maximiser of `l(w)` subject to `w_j ≥ 0` on `support` and
/// `w_j = 0` elsewhere. When `warm_start` is given the result is never worse
/// than it (after projection onto the feasible set).
pub fn maximize_quadratic_nonneg(
    mu: &[f64],
    k: &Array2<f64>,
    support: &[usize],
    warm_start: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = mu.len();
    if k.dim() != (n, n) {
        return Err(Error::shape(format!(
            "kernel matrix is {:?}, expected {n}x{n}",
            k.dim()
        )));
    }
    if support.is_empty() {
        return Err(Error::arg("support must not be empty"));
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= n) {
        return Err(Error::arg(format!("support index {bad} out of range 0..{n}")));
    }
    for (a, &i) in support.iter().enumerate() {
        for &j in &support[a + 1..] {
            let (x, y) = (k[[i, j]], k[[j, i]]);
            if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                return Err(Error::arg(format!(
                    "kernel matrix is not symmetric at ({i}, {j}): {x} vs {y}"
                )));
            }
        }
    }
    if let Some(w0) = warm_start {
        if w0.len() != n {
            return Err(Error::shape(format!("warm start has length {}, expected {n}", w0.len())));
        }
    }

    let mut solver = ActiveSetSolver::new(mu, k);
    for &j in support {
        solver.add_to_support(j);
    }
    let start: Option<Vec<f64>> = warm_start.map(|w0| {
        (0..n)
            .map(|j| if solver.in_support[j] { w0[j].max(0.0) } else { 0.0 })
            .collect()
    });
    if let Some(w0) = &start {
        solver.warm_start(w0);
    }
    solver.solve();

    let w = solver.weights().to_vec();
    if let Some(w0) = start {
        if quadratic_objective(mu, k, &w0) > quadratic_objective(mu, k, &w) {
            return Ok(w0);
        }
    }
    Ok(w)
}

/// Incremental solver kept alive across calls when the support only grows,
/// as in greedy prototype selection.
pub(crate) struct ActiveSetSolver<'a> {
    mu: &'a [f64],
    k: &'a Array2<f64>,
    in_support: Vec<bool>,
    /// Columns whose kernel column is (numerically) spanned by the active set.
    degenerate: Vec<bool>,
    active: Vec<usize>,
    /// Lower-triangular Cholesky factor of `K[active, active]`, row by row.
    chol: Vec<Vec<f64>>,
    w: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-10;
const KKT_TOL: f64 = 1e-12;

impl<'a> ActiveSetSolver<'a> {
    pub(crate) fn new(mu: &'a [f64], k: &'a Array2<f64>) -> Self {
        let n = mu.len();
        ActiveSetSolver {
            mu,
            k,
            in_support: vec![false; n],
            degenerate: vec![false; n],
            active: Vec::new(),
            chol: Vec::new(),
            w: vec![0.0; n],
        }
    }

    pub(crate) fn add_to_support(&mut self, j: usize) {
        self.in_support[j] = true;
    }

    pub(crate) fn weights(&self) -> &[f64] {
        &self.w
    }

    fn warm_start(&mut self, w0: &[f64]) {
        self.w.copy_from_slice(w0);
        let positive: Vec<usize> = (0..w0.len()).filter(|&j| w0[j] > 0.0).collect();
        self.active.clear();
        self.chol.clear();
        for j in positive {
            if self.factor_append(j) {
                self.active.push(j);
            } else {
                // Keep the iterate consistent with the active set.
                self.w[j] = 0.0;
                self.degenerate[j] = true;
            }
        }
    }

    /// Extends the factor with column `j`; false if `j` is numerically dependent.
    fn factor_append(&mut self, j: usize) -> bool {
        let p = self.chol.len();
        let mut l = vec![0.0; p + 1];
        for r in 0..p {
            let mut s = self.k[[self.active[r], j]];
            for c in 0..r {
                s -= self.chol[r][c] * l[c];
            }
            l[r] = s / self.chol[r][r];
        }
        let kjj = self.k[[j, j]];
        let d2 = kjj - l[..p].iter().map(|v| v * v).sum::<f64>();
        if !(d2 > PIVOT_TOL * kjj.abs().max(1e-300)) {
            return false;
        }
        l[p] = d2.sqrt();
        self.chol.push(l);
        true
    }

    fn rebuild_factor(&mut self) {
        let active = std::mem::take(&mut self.active);
        self.chol.clear();
        for j in active {
            if self.factor_append(j) {
                self.active.push(j);
            } else {
                self.w[j] = 0.0;
                self.degenerate[j] = true;
            }
        }
    }

    /// Unconstrained maximiser of `l` on the active coordinates.
    fn face_optimum(&self) -> Vec<f64> {
        let p = self.active.len();
        let mut y = vec![0.0; p];
        for r in 0..p {
            let mut s = self.mu[self.active[r]];
            for c in 0..r {
                s -= self.chol[r][c] * y[c];
            }
            y[r] = s / self.chol[r][r];
        }
        let mut z = vec![0.0; p];
        for r in (0..p).rev() {
            let mut s = y[r];
            for c in (r + 1)..p {
                s -= self.chol[c][r] * z[c];
            }
            z[r] = s / self.chol[r][r];
        }
        z
    }

    fn gradient_at(&self, j: usize) -> f64 {
        self.mu[j]
            - self
                .active
                .iter()
                .map(|&i| self.k[[j, i]] * self.w[i])
                .sum::<f64>()
    }

    pub(crate) fn solve(&mut self) {
        let support_size = self.in_support.iter().filter(|&&s| s).count();
        let max_iters = 1000.max(4 * support_size);
        for _ in 0..max_iters {
            let z = self.face_optimum();
            if z.iter().all(|&v| v > 0.0) {
                for (&j, &v) in self.active.iter().zip(&z) {
                    self.w[j] = v;
                }
                // Most violated optimality condition off the active set.
                let best = (0..self.w.len())
                    .filter(|&j| self.in_support[j] && !self.degenerate[j] && self.w[j] == 0.0)
                    .filter(|j| !self.active.contains(j))
                    .map(|j| (j, self.gradient_at(j)))
                    .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
                        Some(a) if a.1 >= cur.1 => Some(a),
                        _ => Some(cur),
                    });
                match best {
                    Some((j, g)) if g > KKT_TOL * (1.0 + self.mu[j].abs()) => {
                        if self.factor_append(j) {
                            self.active.push(j);
                        } else {
                            self.degenerate[j] = true;
                        }
                    }
                    _ => return,
                }
            } else {
                let mut alpha = 1.0f64;
                for (r, &j) in self.active.iter().enumerate() {
                    if z[r] <= 0.0 {
                        let wj = self.w[j];
                        alpha = alpha.min(wj / (wj - z[r]));
                    }
                }
                let mut blocking = None;
                let mut smallest = f64::INFINITY;
                for (r, &j) in self.active.iter().enumerate() {
                    let next = self.w[j] + alpha * (z[r] - self.w[j]);
                    self.w[j] = next;
                    if z[r] <= 0.0 && next < smallest {
                        smallest = next;
                        blocking = Some(j);
                    }
                }
                let blocking = blocking.expect("an infeasible coordinate blocks the step");
                self.w[blocking] = 0.0;
                let w = &self.w;
                self.active.retain(|&j| j != blocking && w[j] > 0.0);
                for j in 0..self.w.len() {
                    if !self.active.contains(&j) {
                        self.w[j] = 0.0;
                    }
                }
                self.rebuild_factor();
            }
        }
    }
}

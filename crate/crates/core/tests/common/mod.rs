//! Independent reference implementations and data generators shared by the
//! integration tests.
#![allow(dead_code)]

use datared::data::LabeledDataset;
use datared::reducers::EpochTrainer;
use datared::Result;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Uniform features in [0, 1); every class gets at least one row.
pub fn random_dataset(r: &mut ChaCha8Rng, n: usize, d: usize, c: usize) -> LabeledDataset {
    let x = Array2::from_shape_fn((n, d), |_| r.random::<f64>());
    let labels: Vec<usize> = (0..n).map(|i| if i < c { i } else { r.random_range(0..c) }).collect();
    LabeledDataset::new(x, labels, c).unwrap()
}

/// `c` isotropic Gaussian blobs, one per class, with centres in [0, 10)^d.
pub fn gaussian_mixture(r: &mut ChaCha8Rng, n_per_class: usize, d: usize, c: usize) -> LabeledDataset {
    let centres: Vec<Vec<f64>> = (0..c).map(|_| (0..d).map(|_| r.random::<f64>() * 10.0).collect()).collect();
    let mut x = Array2::zeros((n_per_class * c, d));
    let mut labels = Vec::with_capacity(n_per_class * c);
    for k in 0..c {
        for i in 0..n_per_class {
            let row = k * n_per_class + i;
            for j in 0..d {
                let g: f64 = r.sample(StandardNormal);
                x[[row, j]] = centres[k][j] + g;
            }
            labels.push(k);
        }
    }
    LabeledDataset::new(x, labels, c).unwrap()
}

/// Exact integer floor of `tenths/10 · n`.
pub fn floor_tenths(tenths: usize, n: usize) -> usize {
    tenths * n / 10
}

/// Double loop over the definition: the largest distance from an example to
/// its nearest same-class reduced example.
pub fn naive_epsilon(full: &LabeledDataset, red_x: &Array2<f64>, red_labels: &[usize]) -> Option<f64> {
    let mut eps = 0.0f64;
    for i in 0..full.len() {
        let xi: Vec<f64> = full.examples().row(i).to_vec();
        let mut best = f64::INFINITY;
        for j in 0..red_x.nrows() {
            if red_labels[j] == full.labels()[i] {
                let rj: Vec<f64> = red_x.row(j).to_vec();
                best = best.min(dist(&xi, &rj));
            }
        }
        if best.is_infinite() {
            return None;
        }
        eps = eps.max(best);
    }
    Some(eps)
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// `wᵀμ − ½ wᵀKw` over rows `s` with weights `w`.
pub fn objective_on(mu: &[f64], k: &Array2<f64>, s: &[usize], w: &[f64]) -> f64 {
    let mut val = 0.0;
    for (a, &i) in s.iter().enumerate() {
        val += w[a] * mu[i];
        for (b, &j) in s.iter().enumerate() {
            val -= 0.5 * w[a] * w[b] * k[[i, j]];
        }
    }
    val
}

/// max over w ≥ 0 supported on `s`, by enumerating every face: the optimum
/// is the unconstrained stationary point of some subset with all weights
/// positive, or w = 0.
pub fn nnqp_by_faces(mu: &[f64], k: &Array2<f64>, s: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for mask in 1u32..(1 << s.len()) {
        let face: Vec<usize> = (0..s.len()).filter(|&a| mask & (1 << a) != 0).map(|a| s[a]).collect();
        let a: Vec<Vec<f64>> = face.iter().map(|&i| face.iter().map(|&j| k[[i, j]]).collect()).collect();
        let b: Vec<f64> = face.iter().map(|&i| mu[i]).collect();
        if let Some(w) = solve_dense(a, b) {
            if w.iter().all(|&v| v > 0.0) {
                best = best.max(objective_on(mu, k, &face, &w));
            }
        }
    }
    best
}

/// The best objective over all `m`-subsets of the rows.
pub fn protodash_optimum(mu: &[f64], k: &Array2<f64>, m: usize) -> f64 {
    let n = mu.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let s: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        best = best.max(nnqp_by_faces(mu, k, &s));
    }
    best
}

/// Kernel matrix and kernel mean of `x`, computed directly.
pub fn kernel_and_mean(x: &Array2<f64>, h: f64) -> (Array2<f64>, Vec<f64>) {
    let n = x.nrows();
    let k = Array2::from_shape_fn((n, n), |(i, j)| {
        let d = dist(&x.row(i).to_vec(), &x.row(j).to_vec());
        (-d * d / (2.0 * h * h)).exp()
    });
    let mu = (0..n).map(|j| (0..n).map(|i| k[[i, j]]).sum::<f64>() / n as f64).collect();
    (k, mu)
}

/// Replays a fixed correctness trace, one row per epoch.
pub struct ScriptedTrainer {
    pub trace: Vec<Vec<bool>>,
    pub epoch: usize,
    pub sizes_seen: Vec<usize>,
}

impl ScriptedTrainer {
    pub fn new(trace: Vec<Vec<bool>>) -> Self {
        ScriptedTrainer {
            trace,
            epoch: 0,
            sizes_seen: Vec::new(),
        }
    }
}

impl EpochTrainer for ScriptedTrainer {
    fn run_epoch(&mut self, data: &LabeledDataset) -> Result<()> {
        self.epoch += 1;
        self.sizes_seen.push(data.len());
        Ok(())
    }

    fn correctness(&self, data: &LabeledDataset) -> Result<Vec<bool>> {
        let row = &self.trace[(self.epoch.max(1) - 1).min(self.trace.len() - 1)];
        Ok((0..data.len()).map(|i| row.get(i).copied().unwrap_or(true)).collect())
    }
}

/// Dense reduction over every vertex subset, no clearing, no shortcuts.
/// Returns (dim, birth, death) for bars of positive length plus the number
/// of (possibly zero-length) finite pairs and essential classes.
pub fn naive_barcode(points: &Array2<f64>, scale: f64, max_dim: usize) -> (Vec<(usize, f64, f64)>, usize, usize, usize) {
    let m = points.nrows();
    let d = |i: usize, j: usize| -> f64 {
        points
            .row(i)
            .iter()
            .zip(points.row(j).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut cells: Vec<(f64, Vec<usize>)> = Vec::new();
    for mask in 1u32..(1 << m) {
        let v: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        if v.len() > max_dim + 1 {
            continue;
        }
        let mut value = 0.0f64;
        for a in 0..v.len() {
            for b in (a + 1)..v.len() {
                value = value.max(d(v[a], v[b]));
            }
        }
        if value <= scale {
            cells.push((value, v));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.len().cmp(&b.1.len())).then(a.1.cmp(&b.1)));
    let n = cells.len();
    let mut cols: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for (j, (_, v)) in cells.iter().enumerate() {
        if v.len() < 2 {
            continue;
        }
        for (i, (_, f)) in cells.iter().enumerate() {
            if f.len() + 1 == v.len() && f.iter().all(|x| v.contains(x)) {
                cols[j][i] = true;
            }
        }
    }
    let low = |c: &Vec<bool>| c.iter().rposition(|&b| b);
    let mut lows: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        loop {
            let Some(l) = low(&cols[j]) else { break };
            let Some(k) = (0..j).find(|&k| lows[k] == Some(l)) else { break };
            let other = cols[k].clone();
            for (x, y) in cols[j].iter_mut().zip(other) {
                *x ^= y;
            }
        }
        lows[j] = low(&cols[j]);
    }
    let mut bars = Vec::new();
    let mut pairs = 0;
    let mut essential = 0;
    let killed: Vec<bool> = (0..n).map(|i| lows.contains(&Some(i))).collect();
    for j in 0..n {
        if let Some(i) = lows[j] {
            pairs += 1;
            if cells[j].0 > cells[i].0 {
                bars.push((cells[i].1.len() - 1, cells[i].0, cells[j].0));
            }
        } else if !killed[j] {
            essential += 1;
            bars.push((cells[j].1.len() - 1, cells[j].0, f64::INFINITY));
        }
    }
    bars.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    (bars, pairs, essential, n)
}


/// `‖g − ĝ‖ / (‖g‖ + ‖ĝ‖)` between the analytic gradient `g` of `model` on
/// `data` and central differences `ĝ` with step `h`.
pub fn gradient_relative_error(model: &datared::nn::Mlp, data: &LabeledDataset, h: f64) -> f64 {
    let theta = model.parameters();
    let (_, analytic) = model.loss_and_gradient(data).unwrap();
    let mut probe = model.clone();
    let mut numeric = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let mut t = theta.clone();
        t[i] = theta[i] + h;
        probe.set_parameters(&t).unwrap();
        let up = probe.loss(data).unwrap();
        t[i] = theta[i] - h;
        probe.set_parameters(&t).unwrap();
        let down = probe.loss(data).unwrap();
        numeric[i] = (up - down) / (2.0 * h);
    }
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    if na + nb == 0.0 {
        0.0
    } else {
        diff / (na + nb)
    }
}

/// A small network with random parameters (biases included) and a random
/// dataset for it.
pub fn random_network(seed: u64, loss: datared::nn::Loss) -> (datared::nn::Mlp, LabeledDataset) {
    use datared::nn::{Loss, Mlp, MlpConfig};
    let mut r = rng(seed);
    let d = r.random_range(1..5);
    let c = match loss {
        Loss::Bce => 2,
        Loss::WeightedCce => r.random_range(2..5),
    };
    let depth = r.random_range(1..3);
    let hidden: Vec<usize> = (0..depth).map(|_| r.random_range(2..6)).collect();
    let cfg = MlpConfig::new(d, &hidden, c, loss, 0.0).with_seed(seed);
    let mut model = Mlp::init(&cfg).unwrap();
    let theta: Vec<f64> = (0..cfg.parameter_count()).map(|_| r.random_range(-1.0..1.0)).collect();
    model.set_parameters(&theta).unwrap();
    let n = r.random_range(c..12);
    let data = random_dataset(&mut r, n, d, c);
    (model, data)
}

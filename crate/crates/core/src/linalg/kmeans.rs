//! Lloyd's k-means with k-means++ seeding.

use ndarray::Array2;
use rand::Rng;

use super::distance::squared_euclidean;
use crate::data::rng;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    /// Inertia after the initial assignment and after every Lloyd update.
    pub inertia_history: Vec<f64>,
}

/// Clusters the rows of `points` into `k` groups.
///
/// Stops after `max_iters` Lloyd updates or as soon as an update improves
/// the inertia by less than `tol`. A cluster left empty by an update is
/// reseeded at the point farthest from its assigned centroid.
pub fn kmeans(
    points: &Array2<f64>,
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::arg(format!("k-means needs 1 <= k <= n, got k={k}, n={n}")));
    }
    let points = points.as_standard_layout();
    let rows: Vec<&[f64]> = points
        .rows()
        .into_iter()
        .map(|r| r.to_slice().expect("standard layout"))
        .collect();
    let d = points.ncols();

    let mut centroids = plus_plus_init(&rows, k, seed);
    let (mut assignments, mut dists, mut inertia) = assign(&rows, &centroids, k, d);
    let mut inertia_history = vec![inertia];

    for _ in 0..max_iters {
        update(&rows, &assignments, &dists, &mut centroids, k, d);
        let (a, ds, next) = assign(&rows, &centroids, k, d);
        let improvement = inertia - next;
        assignments = a;
        dists = ds;
        inertia = next;
        inertia_history.push(inertia);
        if improvement < tol {
            break;
        }
    }

    Ok(KMeansResult {
        centroids: Array2::from_shape_vec((k, d), centroids).expect("k*d buffer"),
        assignments,
        inertia,
        inertia_history,
    })
}

fn plus_plus_init(rows: &[&[f64]], k: usize, seed: u64) -> Vec<f64> {
    let n = rows.len();
    let mut r = rng::stream(seed, "kmeans++");
    let mut chosen = vec![false; n];
    let first = r.random_range(0..n);
    chosen[first] = true;
    let mut centroids: Vec<f64> = rows[first].to_vec();
    let mut closest: Vec<f64> = rows.iter().map(|x| squared_euclidean(x, rows[first])).collect();

    for _ in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = r.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in closest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just above the final sum.
            pick.unwrap_or_else(|| closest.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            // Every point coincides with a centroid already.
            chosen.iter().position(|&c| !c).expect("k <= n")
        };
        chosen[pick] = true;
        centroids.extend_from_slice(rows[pick]);
        for (i, x) in rows.iter().enumerate() {
            closest[i] = closest[i].min(squared_euclidean(x, rows[pick]));
        }
    }
    centroids
}

fn assign(rows: &[&[f64]], centroids: &[f64], k: usize, d: usize) -> (Vec<usize>, Vec<f64>, f64) {
    let mut assignments = Vec::with_capacity(rows.len());
    let mut dists = Vec::with_capacity(rows.len());
    let mut inertia = 0.0;
    for x in rows {
        let (best, best_d) = (0..k)
            .map(|c| (c, squared_euclidean(x, &centroids[c * d..(c + 1) * d])))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        assignments.push(best);
        dists.push(best_d);
        inertia += best_d;
    }
    (assignments, dists, inertia)
}

fn update(
    rows: &[&[f64]],
    assignments: &[usize],
    dists: &[f64],
    centroids: &mut [f64],
    k: usize,
    d: usize,
) {
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (x, &c) in rows.iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(x.iter()) {
            *s += v;
        }
    }
    let mut taken = vec![false; rows.len()];
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            for (dst, s) in centroids[c * d..(c + 1) * d].iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                *dst = s * inv;
            }
        } else {
            let far = (0..rows.len())
                .filter(|&i| !taken[i])
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                })
                .expect("k <= n leaves a point to reseed with");
            taken[far] = true;
            centroids[c * d..(c + 1) * d].copy_from_slice(rows[far]);
        }
    }
}

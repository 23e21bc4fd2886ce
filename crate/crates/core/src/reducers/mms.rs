use rand::Rng;

use super::{per_class, Method, ReducedDataset};
use crate::data::{rng, LabeledDataset};
use crate::linalg::euclidean;

/// Farthest-point (maxmin) sampling per class, starting from a random
/// example. Selections are returned in the order they were made, so a run
/// at a smaller ratio is a prefix of one at a larger ratio.
pub fn reduce_mms(data: &LabeledDataset, p: f64, seed: u64) -> ReducedDataset {
    let indices = per_class(data, p, Method::Mms, |k, members, n_k| {
        let mut r = rng::stream(seed, &format!("mms/class{k}"));
        let first = r.random_range(0..members.len());
        Ok(maxmin(data, members, first, n_k))
    })
    .expect("maxmin selection cannot fail");
    ReducedDataset::from_indices(data, indices)
}

fn maxmin(data: &LabeledDataset, members: &[usize], first: usize, n_k: usize) -> Vec<usize> {
    let mut picked = vec![members[first]];
    let mut taken = vec![false; members.len()];
    taken[first] = true;
    let seed_row = data.row(members[first]);
    let mut nearest: Vec<f64> = members.iter().map(|&i| euclidean(data.row(i), seed_row)).collect();
    while picked.len() < n_k {
        let mut best: Option<usize> = None;
        for a in (0..members.len()).filter(|&a| !taken[a]) {
            if best.is_none_or(|b| nearest[a] > nearest[b]) {
                best = Some(a);
            }
        }
        let b = best.expect("n_k never exceeds the class size");
        taken[b] = true;
        picked.push(members[b]);
        let row = data.row(members[b]);
        for (a, &i) in members.iter().enumerate() {
            if !taken[a] {
                nearest[a] = nearest[a].min(euclidean(data.row(i), row));
            }
        }
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn hand_trace_on_a_line() {
        let data = LabeledDataset::new(array![[0.0], [1.0], [2.0], [3.0]], vec![0; 4], 1).unwrap();
        assert_eq!(maxmin(&data, &[0, 1, 2, 3], 0, 3), vec![0, 3, 1]);
    }

    #[test]
    fn single_pick_is_the_seed_point() {
        let data = LabeledDataset::new(array![[0.0], [1.0], [2.0], [3.0]], vec![0; 4], 1).unwrap();
        let r = reduce_mms(&data, 0.25, 9);
        assert_eq!(r.len(), 1);
        let mut rr = rng::stream(9, "mms/class0");
        assert_eq!(r.selected_indices().unwrap()[0], rr.random_range(0..4));
    }

    #[test]
    fn nested_selections() {
        let x = ndarray::Array2::from_shape_fn((20, 2), |(i, j)| ((i * 17 + j * 5) % 11) as f64);
        let data = LabeledDataset::new(x, (0..20).map(|i| i % 2).collect(), 2).unwrap();
        let small = reduce_mms(&data, 0.2, 4);
        let large = reduce_mms(&data, 0.6, 4);
        for k in 0..2 {
            let s: Vec<usize> = small.selected_indices().unwrap().iter().copied().filter(|&i| i % 2 == k).collect();
            let l: Vec<usize> = large.selected_indices().unwrap().iter().copied().filter(|&i| i % 2 == k).collect();
            assert_eq!(&l[..s.len()], &s[..]);
        }
    }
}

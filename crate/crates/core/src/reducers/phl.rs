use ndarray::{Array2, Axis};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_delta, per_class, top_n, Method, ReducedDataset};
use crate::data::{rng, LabeledDataset};
use crate::error::Result;
use crate::linalg::euclidean;
use crate::persistence::{ph_outlierness, OutliernessMode};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LandmarkType {
    /// Lowest outlierness first.
    #[default]
    Representative,
    /// Highest outlierness first.
    Vital,
}

impl std::str::FromStr for LandmarkType {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "representative" => Ok(LandmarkType::Representative),
            "vital" => Ok(LandmarkType::Vital),
            other => Err(crate::Error::Argument(format!("unknown landmark type `{other}`"))),
        }
    }
}

/// PH outlierness of every row of `points` within its own `delta`
/// neighbourhood; `None` marks super-outliers (at most two neighbours).
pub fn phl_scores(points: &Array2<f64>, delta: f64, mode: OutliernessMode) -> Vec<Option<f64>> {
    let points = points.as_standard_layout();
    let n = points.nrows();
    let rows: Vec<&[f64]> = points
        .rows()
        .into_iter()
        .map(|r| r.to_slice().expect("standard layout"))
        .collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let neighbours: Vec<usize> = (0..n)
                .filter(|&j| j != i && euclidean(rows[i], rows[j]) <= delta)
                .collect();
            if neighbours.len() <= 2 {
                return None;
            }
            let cloud = points.select(Axis(0), &neighbours);
            Some(ph_outlierness(&cloud, delta, mode))
        })
        .collect()
}

/// PH landmark selection. Classes with too few non-super-outliers keep
/// every example except a random set of super-outliers.
pub fn reduce_phl(
    data: &LabeledDataset,
    p: f64,
    delta: f64,
    mode: OutliernessMode,
    landmark: LandmarkType,
    seed: u64,
) -> Result<ReducedDataset> {
    check_delta(delta)?;
    let indices = per_class(data, p, Method::Phl, |k, members, n_k| {
        let scores = phl_scores(&data.class_matrix(k), delta, mode);
        let regular: Vec<usize> = (0..members.len()).filter(|&a| scores[a].is_some()).collect();
        if n_k <= regular.len() {
            let flat: Vec<f64> = scores.iter().map(|s| s.unwrap_or(f64::NAN)).collect();
            let chosen = top_n(&regular, &flat, n_k, landmark == LandmarkType::Vital);
            return Ok(chosen.into_iter().map(|a| members[a]).collect());
        }
        let outliers: Vec<usize> = (0..members.len()).filter(|&a| scores[a].is_none()).collect();
        let mut r = rng::stream(seed, &format!("phl/class{k}"));
        let mut dropped = vec![false; members.len()];
        for pos in index::sample(&mut r, outliers.len(), members.len() - n_k) {
            dropped[outliers[pos]] = true;
        }
        Ok((0..members.len()).filter(|&a| !dropped[a]).map(|a| members[a]).collect())
    })?;
    Ok(ReducedDataset::from_indices(data, indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn circle_with_centre() -> Array2<f64> {
        Array2::from_shape_fn((9, 2), |(i, j)| {
            if i == 8 {
                return 0.0;
            }
            let t = i as f64 * std::f64::consts::PI / 4.0;
            if j == 0 {
                t.cos()
            } else {
                t.sin()
            }
        })
    }

    #[test]
    fn isolated_point_is_a_super_outlier() {
        let x = array![[0.0], [0.01], [0.02], [0.03], [5.0]];
        let s = phl_scores(&x, 0.1, OutliernessMode::Restricted);
        assert_eq!(s[4], None);
        assert!(s[..4].iter().all(|v| *v == Some(0.0)));
    }

    #[test]
    fn collinear_ties_fall_back_to_index() {
        let x = array![[0.0], [0.01], [0.02], [0.03], [0.04]];
        let data = LabeledDataset::new(x, vec![0; 5], 1).unwrap();
        let r = reduce_phl(&data, 0.4, 1.0, OutliernessMode::Restricted, LandmarkType::Representative, 0).unwrap();
        assert_eq!(r.selected_indices().unwrap(), &[0, 1]);
    }

    #[test]
    fn circle_centre_is_the_vital_landmark() {
        let x = circle_with_centre();
        let side = 2.0 * (std::f64::consts::PI / 8.0).sin();
        let s = phl_scores(&x, 1.05, OutliernessMode::Restricted);
        assert!((s[8].unwrap() - (1.05 - side)).abs() < 1e-12);
        assert!(s[..8].iter().all(|v| *v == Some(0.0)));

        let data = LabeledDataset::new(x, vec![0; 9], 1).unwrap();
        let vital = reduce_phl(&data, 0.12, 1.05, OutliernessMode::Restricted, LandmarkType::Vital, 0).unwrap();
        assert_eq!(vital.selected_indices().unwrap(), &[8]);
        let rep = reduce_phl(&data, 0.12, 1.05, OutliernessMode::Restricted, LandmarkType::Representative, 0).unwrap();
        assert_eq!(rep.selected_indices().unwrap(), &[0]);
    }

    #[test]
    fn shortfall_drops_random_super_outliers() {
        // Two tight clusters of 4 plus three isolated points.
        let x = array![[0.0], [0.01], [0.02], [0.03], [1.0], [1.01], [1.02], [1.03], [3.0], [5.0], [7.0]];
        let data = LabeledDataset::new(x, vec![0; 11], 1).unwrap();
        let r = reduce_phl(&data, 0.9, 0.1, OutliernessMode::Restricted, LandmarkType::Representative, 3).unwrap();
        let idx = r.selected_indices().unwrap();
        assert_eq!(idx.len(), 9);
        assert!((0..8).all(|i| idx.contains(&i)));
        assert_eq!(idx.iter().filter(|&&i| i >= 8).count(), 1);
    }
}

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::distance_matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    /// Vertex ids, strictly increasing.
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Simplices sorted by (value, dimension, vertices), so every face precedes
/// its cofaces.
#[derive(Clone, Debug)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    max_scale: f64,
    max_dim: usize,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn max_scale(&self) -> f64 {
        self.max_scale
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Number of simplices of each dimension `0..=max_dim`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.max_dim + 1];
        for s in &self.simplices {
            c[s.dim()] += 1;
        }
        c
    }
}

/// Clique complex of the rows of `points`: an edge enters at the distance
/// between its endpoints, a higher simplex at its longest edge. Simplices
/// above `max_scale` or of dimension above `max_dim` are left out.
pub fn rips_filtration(points: &Array2<f64>, max_scale: f64, max_dim: usize) -> Result<Filtration> {
    if max_dim > 3 {
        return Err(Error::arg(format!("Rips complexes are built up to dimension 3, got {max_dim}")));
    }
    let m = points.nrows();
    let dist = distance_matrix(&points.as_standard_layout().to_owned());
    let mut simplices: Vec<Simplex> = (0..m)
        .map(|v| Simplex {
            vertices: vec![v],
            value: 0.0,
        })
        .collect();

    // Higher-index neighbours of each vertex.
    let up: Vec<Vec<usize>> = (0..m)
        .map(|i| ((i + 1)..m).filter(|&j| dist[[i, j]] <= max_scale).collect())
        .collect();
    let adjacent = |i: usize, j: usize| i != j && dist[[i, j]] <= max_scale;

    if max_dim >= 1 {
        for i in 0..m {
            for &j in &up[i] {
                simplices.push(Simplex {
                    vertices: vec![i, j],
                    value: dist[[i, j]],
                });
                if max_dim < 2 {
                    continue;
                }
                for &k in up[j].iter().filter(|&&k| adjacent(i, k)) {
                    let tri = dist[[i, j]].max(dist[[i, k]]).max(dist[[j, k]]);
                    simplices.push(Simplex {
                        vertices: vec![i, j, k],
                        value: tri,
                    });
                    if max_dim < 3 {
                        continue;
                    }
                    for &l in up[k].iter().filter(|&&l| adjacent(i, l) && adjacent(j, l)) {
                        let tet = tri.max(dist[[i, l]]).max(dist[[j, l]]).max(dist[[k, l]]);
                        simplices.push(Simplex {
                            vertices: vec![i, j, k, l],
                            value: tet,
                        });
                    }
                }
            }
        }
    }

    simplices.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Ok(Filtration {
        simplices,
        max_scale,
        max_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::collections::HashMap;

    #[test]
    fn single_point() {
        let f = rips_filtration(&array![[3.0, 1.0]], 1.0, 2).unwrap();
        assert_eq!(f.simplices(), &[Simplex { vertices: vec![0], value: 0.0 }]);
    }

    #[test]
    fn two_points() {
        let f = rips_filtration(&array![[0.0], [1.0]], 2.0, 2).unwrap();
        let values: Vec<(usize, f64)> = f.simplices().iter().map(|s| (s.dim(), s.value)).collect();
        assert_eq!(values, vec![(0, 0.0), (0, 0.0), (1, 1.0)]);
    }

    #[test]
    fn unit_square_counts() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let f = rips_filtration(&x, 2.0, 2).unwrap();
        assert_eq!(f.counts(), vec![4, 6, 4]);
        let r2 = 2f64.sqrt();
        let mut edges: Vec<f64> = f.simplices().iter().filter(|s| s.dim() == 1).map(|s| s.value).collect();
        edges.sort_by(f64::total_cmp);
        assert_eq!(&edges[..4], &[1.0; 4]);
        assert!(edges[4..].iter().all(|&v| (v - r2).abs() < 1e-15));
        assert!(f.simplices().iter().filter(|s| s.dim() == 2).all(|s| (s.value - r2).abs() < 1e-15));
    }

    #[test]
    fn scale_cutoff_and_dim_bound() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let f = rips_filtration(&x, 1.2, 3).unwrap();
        assert_eq!(f.counts(), vec![4, 4, 0, 0]);
        assert!(rips_filtration(&x, 1.0, 4).is_err());
    }

    #[test]
    fn faces_precede_cofaces() {
        let x = Array2::from_shape_fn((7, 3), |(i, j)| ((i * 13 + j * 7) % 10) as f64 / 3.0);
        let f = rips_filtration(&x, 10.0, 3).unwrap();
        let pos: HashMap<&[usize], (usize, f64)> = f
            .simplices()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices.as_slice(), (i, s.value)))
            .collect();
        for (i, s) in f.simplices().iter().enumerate() {
            if s.dim() == 0 {
                continue;
            }
            for skip in 0..s.vertices.len() {
                let face: Vec<usize> = s.vertices.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
                let (fi, fv) = pos[face.as_slice()];
                assert!(fi < i && fv <= s.value);
            }
        }
        assert!(f.simplices().windows(2).all(|w| w[0].value <= w[1].value));
    }
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::filtration::Filtration;

/// A persistence interval `[birth, death)`; essential classes die at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn length(&self) -> f64 {
        self.death - self.birth
    }
}

/// Intervals per homology dimension. Zero-length bars are not stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Barcode {
    dims: Vec<Vec<Interval>>,
}

impl Barcode {
    /// Bars of dimension `n` (empty if `n` exceeds the complex dimension).
    pub fn dim(&self, n: usize) -> &[Interval] {
        self.dims.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn dims(&self) -> usize {
        self.dims.len()
    }

    pub fn essential_count(&self) -> usize {
        self.dims.iter().flatten().filter(|b| b.is_essential()).count()
    }

    pub fn finite_count(&self) -> usize {
        self.dims.iter().flatten().filter(|b| !b.is_essential()).count()
    }

    /// Bars sorted by (dimension, birth, death); handy for comparisons.
    pub fn sorted(&self) -> Vec<(usize, Interval)> {
        let mut all: Vec<(usize, Interval)> = self
            .dims
            .iter()
            .enumerate()
            .flat_map(|(n, bars)| bars.iter().map(move |&b| (n, b)))
            .collect();
        all.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.birth.total_cmp(&b.1.birth))
                .then(a.1.death.total_cmp(&b.1.death))
        });
        all
    }
}

fn key(vertices: &[usize]) -> u128 {
    vertices
        .iter()
        .fold(0u128, |acc, &v| (acc << 32) | (v as u128 + 1))
}

/// Symmetric difference of two ascending index lists.
fn add_mod2(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Persistence barcode of `filtration` by column reduction over GF(2).
///
/// Dimensions are reduced from the top down so that a column known to be
/// the pivot of a higher-dimensional column can be skipped (clearing).
pub fn barcodes(filtration: &Filtration) -> Barcode {
    let simplices = filtration.simplices();
    let n = simplices.len();
    let index: HashMap<u128, u32> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (key(&s.vertices), i as u32))
        .collect();

    let boundary = |i: usize| -> Vec<u32> {
        let v = &simplices[i].vertices;
        if v.len() == 1 {
            return Vec::new();
        }
        let mut faces: Vec<u32> = (0..v.len())
            .map(|skip| {
                let face: Vec<usize> = v
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &x)| x)
                    .collect();
                index[&key(&face)]
            })
            .collect();
        faces.sort_unstable();
        faces
    };

    let max_dim = simplices.iter().map(|s| s.vertices.len() - 1).max().unwrap_or(0);
    // pivot_of[low] = column whose reduced boundary has `low` as lowest entry.
    let mut pivot_of: Vec<Option<u32>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut reduced: HashMap<u32, Vec<u32>> = HashMap::new();

    for q in (1..=max_dim).rev() {
        for j in 0..n {
            if simplices[j].vertices.len() != q + 1 || cleared[j] {
                continue;
            }
            let mut col = boundary(j);
            while let Some(&low) = col.last() {
                match pivot_of[low as usize] {
                    Some(other) => col = add_mod2(&col, &reduced[&other]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_of[low as usize] = Some(j as u32);
                cleared[low as usize] = true;
                reduced.insert(j as u32, col);
            }
        }
    }

    let mut dims = vec![Vec::new(); max_dim + 1];
    let is_death: Vec<bool> = (0..n).map(|j| reduced.contains_key(&(j as u32))).collect();
    for i in 0..n {
        if is_death[i] {
            continue;
        }
        let dim = simplices[i].vertices.len() - 1;
        let birth = simplices[i].value;
        let death = match pivot_of[i] {
            Some(j) => simplices[j as usize].value,
            None => f64::INFINITY,
        };
        if death > birth {
            dims[dim].push(Interval { birth, death });
        }
    }
    Barcode { dims }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::rips_filtration;
    use ndarray::{array, Array2};

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        let f = rips_filtration(&x, 2.0, 2).unwrap();
        let b = barcodes(&f);
        let h0 = b.dim(0);
        assert_eq!(h0.iter().filter(|i| i.is_essential()).count(), 1);
        let finite: Vec<f64> = h0.iter().filter(|i| !i.is_essential()).map(|i| i.death).collect();
        assert_eq!(finite.len(), 2);
        assert!(finite.iter().all(|&d| (d - 1.0).abs() < 1e-12));
        assert!(b.dim(1).is_empty());
    }

    #[test]
    fn unit_square_loop() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let b = barcodes(&rips_filtration(&x, 2.0, 2).unwrap());
        assert_eq!(b.dim(1).len(), 1);
        let bar = b.dim(1)[0];
        assert_eq!(bar.birth, 1.0);
        assert!((bar.death - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_point_has_one_essential_class() {
        let b = barcodes(&rips_filtration(&array![[0.0]], 1.0, 2).unwrap());
        assert_eq!(b.dim(0), &[Interval { birth: 0.0, death: f64::INFINITY }]);
        assert_eq!(b.finite_count(), 0);
    }

    #[test]
    fn components_at_max_scale() {
        // Two clusters far apart: two essential H0 classes.
        let x = array![[0.0], [0.1], [0.2], [5.0], [5.1]];
        let b = barcodes(&rips_filtration(&x, 1.0, 2).unwrap());
        assert_eq!(b.dim(0).iter().filter(|i| i.is_essential()).count(), 2);
    }

    #[test]
    fn pairing_accounts_for_every_simplex() {
        let x = Array2::from_shape_fn((8, 2), |(i, j)| (((i + 1) * (j + 3) * 37) % 17) as f64 / 5.0);
        let f = rips_filtration(&x, 10.0, 3).unwrap();
        let b = barcodes(&f);
        // Zero-length pairs are dropped, so finite bars can only be fewer.
        assert!(2 * b.finite_count() + b.essential_count() <= f.len());
        assert_eq!((f.len() - b.essential_count()) % 2, 0);
    }
}

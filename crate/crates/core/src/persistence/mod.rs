//! Vietoris–Rips persistence for small point clouds.
//!
//! [`rips_filtration`] enumerates the clique complex up to the requested
//! dimension, [`barcodes`] reduces its boundary matrix over GF(2) and
//! [`ph_outlierness`] turns a barcode into the longest-bar score used by the
//! landmark reducer.

mod filtration;
mod reduction;

pub use filtration::{rips_filtration, Filtration, Simplex};
pub use reduction::{barcodes, Barcode, Interval};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Which homology dimensions contribute to the outlierness score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutliernessMode {
    /// Longest bar over dimensions 0, 1 and 2.
    Multidimensional,
    /// Longest bar in dimension 1 only.
    #[default]
    Restricted,
}

impl OutliernessMode {
    /// Highest simplex dimension the score needs: one above its top homology dimension.
    pub fn complex_dim(self) -> usize {
        match self {
            OutliernessMode::Multidimensional => 3,
            OutliernessMode::Restricted => 2,
        }
    }

    fn homology_dims(self) -> std::ops::RangeInclusive<usize> {
        match self {
            OutliernessMode::Multidimensional => 0..=2,
            OutliernessMode::Restricted => 1..=1,
        }
    }
}

impl std::str::FromStr for OutliernessMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "multidimensional" | "multi" => Ok(OutliernessMode::Multidimensional),
            "restricted" => Ok(OutliernessMode::Restricted),
            other => Err(crate::Error::Argument(format!("unknown outlierness mode `{other}`"))),
        }
    }
}

/// Longest bar of the Rips barcode of `points` built up to scale `delta`.
///
/// Essential classes are cut off at `delta` before measuring, and an empty
/// barcode scores 0.
pub fn ph_outlierness(points: &Array2<f64>, delta: f64, mode: OutliernessMode) -> f64 {
    let filtration = rips_filtration(points, delta, mode.complex_dim())
        .expect("complex dimension is at most 3");
    let barcode = barcodes(&filtration);
    mode.homology_dims()
        .flat_map(|n| barcode.dim(n).iter())
        .map(|bar| bar.death.min(delta) - bar.birth)
        .fold(0.0, f64::max)
}

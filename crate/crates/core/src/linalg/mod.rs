//! Numerical kernels shared by the reducers.

mod decompose;
mod distance;
mod kmeans;
mod qp;

pub use decompose::{decompose, nmf, Decomposition, DecompositionKind, NmfResult};
pub use distance::{distance_matrix, euclidean, pairwise_distance, squared_euclidean, DistanceMetric};
pub use kmeans::{kmeans, KMeansResult, DEFAULT_MAX_ITERS, DEFAULT_TOL};
pub use qp::{maximize_quadratic_nonneg, quadratic_objective};
pub(crate) use qp::ActiveSetSolver;

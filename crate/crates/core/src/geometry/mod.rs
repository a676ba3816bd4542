//! Curvature proxies and intrinsic-dimension estimators.

mod curvature;
mod dimension;
mod hutchinson;

pub use curvature::{
    curvature_report, encoder_mu_jacobian, fd_hessian_frob, fd_hessian_frob_fn, hessian_curvature, hessian_curvature_with_probes,
    jacobian_penalty, jacobian_penalty_value, jacobian_penalty_with_probes, CurvatureReport,
};
pub use dimension::{
    knn_distances, local_participation_ratio, mle_intrinsic_dim, participation_ratio,
    participation_ratio_from_eigenvalues,
};
pub use hutchinson::{draw_probes, hutchinson_exhaustive, hutchinson_frob, ProbeConfig, ProbeDistribution};

use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::nets::NetsError;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("probe count must be at least 1")]
    NoProbes,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need more than {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("neighbor count must be at least 2, got {0}")]
    NeighborCount(usize),
    #[error("exhaustive enumeration over 2^{0} sign vectors is too large")]
    TooManySigns(usize),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Nets(#[from] NetsError),
}

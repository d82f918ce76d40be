//! Sparse kernels, spectral-norm estimation and diagonal preconditioning.

mod scaling;
mod sparse;
mod spectral;

pub use scaling::{
    apply_scaling, compute_scaling, pock_chambolle_rescale, ruiz_rescale, unscale_solution, ScalingConfig,
    ScalingInfo, ScalingMode,
};
pub(crate) use scaling::{unscale_dual, unscale_primal};
pub use sparse::{SparseBuildError, SparseMatrix};
pub use spectral::{spectral_norm_estimate, SpectralEstimate};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// `‖a − b‖₂`.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{norm2, SparseMatrix};

/// Result of a power-iteration estimate of `‖M‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    /// `false` when `max_iters` ran out before the residual test passed; `value`
    /// is then the best lower estimate found.
    pub converged: bool,
}

/// Estimates the largest singular value of `m` by power iteration on `MᵀM`
/// from a seeded random start.
///
/// Stops once the eigen-residual `‖MᵀMv − σ²v‖` drops below `tol·σ²`, which
/// bounds the relative error of `σ²` by `tol`.
pub fn spectral_norm_estimate(m: &SparseMatrix, tol: f64, max_iters: usize, seed: u64) -> SpectralEstimate {
    assert!(tol > 0.0, "tolerance must be positive");
    if m.nnz() == 0 {
        return SpectralEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..m.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|e| *e /= nv);

    let mut mv = vec![0.0; m.rows()];
    let mut w = vec![0.0; m.cols()];
    let mut best = 0.0f64;
    for it in 1..=max_iters {
        m.matvec_into(&v, &mut mv);
        m.matvec_transpose_into(&mv, &mut w);
        // Rayleigh quotient of MᵀM at unit v.
        let lambda = mv.iter().map(|e| e * e).sum::<f64>();
        best = best.max(lambda);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        let nw = norm2(&w);
        if residual <= tol * lambda || nw == 0.0 {
            return SpectralEstimate {
                value: best.sqrt(),
                iterations: it,
                converged: true,
            };
        }
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / nw);
    }
    SpectralEstimate {
        value: best.sqrt(),
        iterations: max_iters,
        converged: false,
    }
}

//! The PDHG iteration on the saddle form, with cached matrix products.
//!
//! One step is
//!
//! ```text
//! x⁺ = proj_X(x − η(c − Kᵀy))
//! y⁺ = proj_Y(y + σ(q − K(2x⁺ − x)))
//! ```
//!
//! with `η = s/ω` and `σ = sω`. The state caches `Kx` and `Kᵀy`, so a step
//! costs one `K` product (for `Kx⁺`) and one `Kᵀ` product (for `Kᵀy⁺`).

use crate::linalg::{dot, SparseMatrix};
use crate::problem::SaddleForm;

/// Step-size `s` and primal weight `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepState {
    pub step_size: f64,
    pub primal_weight: f64,
}

impl StepState {
    pub fn new(step_size: f64, primal_weight: f64) -> Self {
        assert!(step_size > 0.0 && primal_weight > 0.0, "step size and primal weight must be positive");
        Self {
            step_size,
            primal_weight,
        }
    }

    /// Primal step `η = s/ω`.
    pub fn eta(&self) -> f64 {
        self.step_size / self.primal_weight
    }

    /// Dual step `σ = sω`.
    pub fn sigma(&self) -> f64 {
        self.step_size * self.primal_weight
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdhgError {
    #[error("non-finite iterate at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },
}

/// Current primal-dual point, its running average and iteration counters.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    kx: Vec<f64>,
    kty: Vec<f64>,
    sum_x: Vec<f64>,
    sum_y: Vec<f64>,
    sum_weight: f64,
    /// Iterations since the last restart.
    pub inner_count: usize,
    pub total_count: usize,
    /// Number of restarts so far.
    pub epoch_index: usize,
    pub matvecs: u64,
    // Proposal buffers, swapped in on acceptance.
    x_next: Vec<f64>,
    y_next: Vec<f64>,
    kx_next: Vec<f64>,
}

impl IterateState {
    /// Starts from the projection of `(x0, y0)` onto `X × Y`.
    pub fn new(saddle: &SaddleForm, x0: &[f64], y0: &[f64]) -> Self {
        let n = saddle.num_vars();
        let m = saddle.num_rows();
        assert_eq!(x0.len(), n);
        assert_eq!(y0.len(), m);
        let x = project_primal(x0, &saddle.lower, &saddle.upper);
        let y = project_dual(y0, saddle.m1);
        let mut state = Self {
            kx: vec![0.0; m],
            kty: vec![0.0; n],
            sum_x: vec![0.0; n],
            sum_y: vec![0.0; m],
            sum_weight: 0.0,
            inner_count: 0,
            total_count: 0,
            epoch_index: 0,
            matvecs: 0,
            x_next: x.clone(),
            y_next: y.clone(),
            kx_next: vec![0.0; m],
            x,
            y,
        };
        state.refresh_products(&saddle.k);
        state
    }

    /// Starts from the projection of the origin.
    pub fn at_origin(saddle: &SaddleForm) -> Self {
        Self::new(saddle, &vec![0.0; saddle.num_vars()], &vec![0.0; saddle.num_rows()])
    }

    fn refresh_products(&mut self, k: &SparseMatrix) {
        k.matvec_into(&self.x, &mut self.kx);
        k.matvec_transpose_into(&self.y, &mut self.kty);
        self.matvecs += 2;
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn kty(&self) -> &[f64] {
        &self.kty
    }

    /// Weighted average of the iterates since the last restart, or the current
    /// point if no step has been taken in this epoch.
    pub fn average(&self) -> (Vec<f64>, Vec<f64>) {
        if self.sum_weight == 0.0 {
            return (self.x.clone(), self.y.clone());
        }
        let w = self.sum_weight;
        (
            self.sum_x.iter().map(|s| s / w).collect(),
            self.sum_y.iter().map(|s| s / w).collect(),
        )
    }

    pub fn sum_weight(&self) -> f64 {
        self.sum_weight
    }

    /// Computes the proposal `(x⁺, y⁺)` for the given steps into the scratch
    /// buffers. Costs one `K` product.
    pub(crate) fn propose(&mut self, saddle: &SaddleForm, step: &StepState) {
        let eta = step.eta();
        let sigma = step.sigma();
        for j in 0..self.x.len() {
            let v = self.x[j] - eta * (saddle.c[j] - self.kty[j]);
            self.x_next[j] = v.clamp(saddle.lower[j], saddle.upper[j]);
        }
        saddle.k.matvec_into(&self.x_next, &mut self.kx_next);
        self.matvecs += 1;
        for i in 0..self.y.len() {
            let v = self.y[i] + sigma * (saddle.q[i] - (2.0 * self.kx_next[i] - self.kx[i]));
            self.y_next[i] = if i < saddle.m1 { v.max(0.0) } else { v };
        }
    }

    /// `(‖Δx‖², ‖Δy‖², Δyᵀ K Δx)` between the proposal and the current point.
    pub(crate) fn proposal_movement(&self) -> (f64, f64, f64) {
        let dx2: f64 = self.x_next.iter().zip(&self.x).map(|(a, b)| (a - b).powi(2)).sum();
        let dy2: f64 = self.y_next.iter().zip(&self.y).map(|(a, b)| (a - b).powi(2)).sum();
        let interaction: f64 = self
            .y_next
            .iter()
            .zip(&self.y)
            .zip(self.kx_next.iter().zip(&self.kx))
            .map(|((yn, y), (kxn, kx))| (yn - y) * (kxn - kx))
            .sum();
        (dx2, dy2, interaction)
    }

    /// Makes the proposal the current point and folds it into the average
    /// with the given weight. Costs one `Kᵀ` product.
    pub(crate) fn accept(&mut self, saddle: &SaddleForm, weight: f64) -> Result<(), PdhgError> {
        let finite = self.x_next.iter().chain(&self.y_next).all(|v| v.is_finite());
        if !finite {
            return Err(PdhgError::NonFiniteIterate {
                iteration: self.total_count + 1,
            });
        }
        std::mem::swap(&mut self.x, &mut self.x_next);
        std::mem::swap(&mut self.y, &mut self.y_next);
        std::mem::swap(&mut self.kx, &mut self.kx_next);
        saddle.k.matvec_transpose_into(&self.y, &mut self.kty);
        self.matvecs += 1;
        for (s, v) in self.sum_x.iter_mut().zip(&self.x) {
            *s += weight * v;
        }
        for (s, v) in self.sum_y.iter_mut().zip(&self.y) {
            *s += weight * v;
        }
        self.sum_weight += weight;
        self.inner_count += 1;
        self.total_count += 1;
        Ok(())
    }

    /// Jumps to `(x, y)`, clears the running average and opens a new epoch.
    pub fn restart_to(&mut self, saddle: &SaddleForm, x: Vec<f64>, y: Vec<f64>) {
        self.x = x;
        self.y = y;
        self.refresh_products(&saddle.k);
        self.sum_x.iter_mut().for_each(|s| *s = 0.0);
        self.sum_y.iter_mut().for_each(|s| *s = 0.0);
        self.sum_weight = 0.0;
        self.inner_count = 0;
        self.epoch_index += 1;
    }
}

/// Clamps `x` componentwise to `[l, u]`.
pub fn project_primal(x: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(&v, (&l, &u))| v.clamp(l, u))
        .collect()
}

/// Clamps the first `m1` components at zero from below.
pub fn project_dual(y: &[f64], m1: usize) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, &v)| if i < m1 { v.max(0.0) } else { v })
        .collect()
}

/// One PDHG step with uniform averaging weight.
pub fn pdhg_step(state: &mut IterateState, saddle: &SaddleForm, step: &StepState) -> Result<(), PdhgError> {
    state.propose(saddle, step);
    state.accept(saddle, 1.0)
}

/// Which quantity [`ps_norm`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    /// `√(ω‖Δx‖² + ‖Δy‖²/ω)`.
    Weighted,
    /// The quadratic form `(1/s)(ω‖Δx‖² + ‖Δy‖²/ω) + 2ΔyᵀKΔx`, i.e. the
    /// squared `P_s` norm. Costs one `K` product.
    PsQuadratic,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PsNormError {
    #[error("P_s is not positive definite: s·‖K‖ = {0} ≥ 1")]
    NonPositive(f64),
    #[error("dimension mismatch")]
    DimensionMismatch,
}

/// Distance between two points in the PDHG geometry.
///
/// `norm_k` is an estimate of `‖K‖₂`; the `PsQuadratic` mode refuses to
/// evaluate when `s·‖K‖ ≥ 1`, since the form may then be indefinite.
pub fn ps_norm(
    k: &SparseMatrix,
    norm_k: f64,
    z1: (&[f64], &[f64]),
    z2: (&[f64], &[f64]),
    step: &StepState,
    mode: NormMode,
) -> Result<f64, PsNormError> {
    let (x1, y1) = z1;
    let (x2, y2) = z2;
    if x1.len() != x2.len() || y1.len() != y2.len() || x1.len() != k.cols() || y1.len() != k.rows() {
        return Err(PsNormError::DimensionMismatch);
    }
    let dx: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a - b).collect();
    let dy: Vec<f64> = y1.iter().zip(y2).map(|(a, b)| a - b).collect();
    let w = step.primal_weight;
    let weighted_sq = w * dot(&dx, &dx) + dot(&dy, &dy) / w;
    match mode {
        NormMode::Weighted => Ok(weighted_sq.sqrt()),
        NormMode::PsQuadratic => {
            let s_norm = step.step_size * norm_k;
            if s_norm >= 1.0 {
                return Err(PsNormError::NonPositive(s_norm));
            }
            let kdx = k.matvec(&dx).map_err(|_| PsNormError::DimensionMismatch)?;
            Ok(weighted_sq / step.step_size + 2.0 * dot(&dy, &kdx))
        }
    }
}

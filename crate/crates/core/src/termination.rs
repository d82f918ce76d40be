//! Relative KKT error, optimality test and infeasibility certificates.

use serde::{Deserialize, Serialize};

use crate::error::DimensionError;
use crate::linalg::{dot, norm2, norm_inf};
use crate::problem::SaddleForm;

/// Residuals of a primal-dual point, absolute and relative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub primal_residual_norm: f64,
    pub dual_residual_norm: f64,
    pub duality_gap_abs: f64,
    pub rel_primal_residual: f64,
    pub rel_dual_residual: f64,
    pub rel_duality_gap: f64,
    /// `cᵀx`, without the objective offset.
    pub primal_objective: f64,
    /// `qᵀy + Σ l·λ⁺ − Σ u·λ⁻`, without the objective offset.
    pub dual_objective: f64,
    pub reduced_costs: Vec<f64>,
}

impl KktReport {
    /// Largest of the three relative errors.
    pub fn max_relative(&self) -> f64 {
        self.rel_primal_residual.max(self.rel_dual_residual).max(self.rel_duality_gap)
    }
}

/// Part of `r` representable as a bound multiplier: the sign is free when
/// both bounds are finite, nonnegative with only `l`, nonpositive with only
/// `u`, and zero for a free variable.
fn bound_multiplier(r: f64, l: f64, u: f64) -> f64 {
    match (l.is_finite(), u.is_finite()) {
        (true, true) => r,
        (true, false) => r.max(0.0),
        (false, true) => r.min(0.0),
        (false, false) => 0.0,
    }
}

/// `Σ l·λ` over positive `λ` plus `Σ u·λ` over negative `λ`.
fn bound_term(lambda: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    lambda
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(&lam, (&l, &u))| {
            if lam > 0.0 {
                l * lam
            } else if lam < 0.0 {
                u * lam
            } else {
                0.0
            }
        })
        .sum()
}

/// KKT residuals of `(x, y)` on `saddle`.
pub fn kkt_error(saddle: &SaddleForm, x: &[f64], y: &[f64]) -> Result<KktReport, DimensionError> {
    let kx = saddle.k.matvec(x)?;
    let kty = saddle.k.matvec_transpose(y)?;
    Ok(kkt_from_products(saddle, x, y, &kx, &kty))
}

pub(crate) fn kkt_from_products(saddle: &SaddleForm, x: &[f64], y: &[f64], kx: &[f64], kty: &[f64]) -> KktReport {
    let m1 = saddle.m1;
    let primal_sq: f64 = (0..kx.len())
        .map(|i| {
            let v = saddle.q[i] - kx[i];
            if i < m1 {
                v.max(0.0).powi(2)
            } else {
                v * v
            }
        })
        .sum();
    let reduced: Vec<f64> = saddle.c.iter().zip(kty).map(|(c, k)| c - k).collect();
    let lambda: Vec<f64> = reduced
        .iter()
        .zip(saddle.lower.iter().zip(&saddle.upper))
        .map(|(&r, (&l, &u))| bound_multiplier(r, l, u))
        .collect();
    let dual_sq: f64 = reduced.iter().zip(&lambda).map(|(r, l)| (r - l).powi(2)).sum();
    let primal_objective = dot(&saddle.c, x);
    let dual_objective = dot(&saddle.q, y) + bound_term(&lambda, &saddle.lower, &saddle.upper);
    let gap = (primal_objective - dual_objective).abs();
    let primal = primal_sq.sqrt();
    let dual = dual_sq.sqrt();
    KktReport {
        primal_residual_norm: primal,
        dual_residual_norm: dual,
        duality_gap_abs: gap,
        rel_primal_residual: primal / (1.0 + norm2(&saddle.q)),
        rel_dual_residual: dual / (1.0 + norm2(&saddle.c)),
        rel_duality_gap: gap / (1.0 + primal_objective.abs() + dual_objective.abs()),
        primal_objective,
        dual_objective,
        reduced_costs: lambda,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationCriteria {
    pub tol_optimal: f64,
    /// Tolerance on the residuals of unit-normalized certificates.
    pub tol_infeas: f64,
    pub iteration_limit: usize,
    pub time_limit_seconds: Option<f64>,
    pub check_interval: usize,
}

impl Default for TerminationCriteria {
    fn default() -> Self {
        Self {
            tol_optimal: 1e-8,
            tol_infeas: 1e-10,
            iteration_limit: 1_000_000,
            time_limit_seconds: None,
            check_interval: 64,
        }
    }
}

impl TerminationCriteria {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol_optimal > 0.0) || !(self.tol_infeas > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if self.check_interval == 0 {
            return Err("check interval must be at least 1".into());
        }
        if let Some(t) = self.time_limit_seconds {
            if !(t > 0.0) {
                return Err(format!("time limit must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

/// All three relative errors within the optimality tolerance (inclusive).
pub fn check_optimal(report: &KktReport, criteria: &TerminationCriteria) -> bool {
    let eps = criteria.tol_optimal;
    report.rel_primal_residual <= eps && report.rel_dual_residual <= eps && report.rel_duality_gap <= eps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    /// `z^{k+1} − z^k`.
    Difference,
    /// `(z^k − z^0)/k`.
    Normalized,
}

/// A direction whose primal part may certify dual infeasibility and whose
/// dual part may certify primal infeasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCandidate {
    pub kind: CandidateSource,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub source_iteration: usize,
}

/// Difference and normalized candidates from the last two iterates and the
/// reference point `z^0` that lies `k` iterations back.
pub fn extract_certificates(
    previous: (&[f64], &[f64]),
    current: (&[f64], &[f64]),
    origin: (&[f64], &[f64]),
    k: usize,
    iteration: usize,
) -> Vec<CertificateCandidate> {
    assert!(k >= 1, "need at least one iteration since the reference point");
    let diff = |a: &[f64], b: &[f64], scale: f64| a.iter().zip(b).map(|(u, v)| (u - v) / scale).collect::<Vec<_>>();
    vec![
        CertificateCandidate {
            kind: CandidateSource::Difference,
            x: diff(current.0, previous.0, 1.0),
            y: diff(current.1, previous.1, 1.0),
            source_iteration: iteration,
        },
        CertificateCandidate {
            kind: CandidateSource::Normalized,
            x: diff(current.0, origin.0, k as f64),
            y: diff(current.1, origin.1, k as f64),
            source_iteration: iteration,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("zero vector is not a certificate")]
pub struct NotACertificate;

/// Outcome of checking a unit-normalized certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateVerdict {
    pub valid: bool,
    /// The Farkas objective of the unit ray: `qᵀŷ + Σ l·λ̂⁺ + Σ u·λ̂⁻` for a
    /// dual ray, `−cᵀd̂` for a primal ray. Positive means improving.
    pub margin: f64,
    /// Largest violation of the sign and ray conditions.
    pub residual: f64,
    pub normalized: Vec<f64>,
}

fn normalize(v: &[f64]) -> Result<Vec<f64>, NotACertificate> {
    let n = norm2(v);
    if !(n > 0.0) || !n.is_finite() {
        return Err(NotACertificate);
    }
    Ok(v.iter().map(|e| e / n).collect())
}

/// Checks whether `y` proves `{x ∈ X : Gx ≥ h, Ax = b}` empty.
pub fn check_primal_infeasible(saddle: &SaddleForm, y: &[f64], tol: f64) -> Result<CertificateVerdict, NotACertificate> {
    let yh = normalize(y)?;
    let sign_violation = yh[..saddle.m1].iter().fold(0.0f64, |acc, v| acc.max(-v));
    let r: Vec<f64> = saddle
        .k
        .matvec_transpose(&yh)
        .expect("certificate has K's row count")
        .into_iter()
        .map(|v| -v)
        .collect();
    let lambda: Vec<f64> = r
        .iter()
        .zip(saddle.lower.iter().zip(&saddle.upper))
        .map(|(&ri, (&l, &u))| bound_multiplier(ri, l, u))
        .collect();
    let stationarity = r.iter().zip(&lambda).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let margin = dot(&saddle.q, &yh) + bound_term(&lambda, &saddle.lower, &saddle.upper);
    let residual = sign_violation.max(stationarity);
    let valid = residual <= tol && margin >= tol * norm2(&saddle.q).max(1.0);
    Ok(CertificateVerdict {
        valid,
        margin,
        residual,
        normalized: yh,
    })
}

/// Checks whether `d` is an improving ray of the feasible set, proving the
/// dual empty (the primal unbounded when it is feasible).
pub fn check_dual_infeasible(saddle: &SaddleForm, d: &[f64], tol: f64) -> Result<CertificateVerdict, NotACertificate> {
    let dh = normalize(d)?;
    let kd = saddle.k.matvec(&dh).expect("certificate has K's column count");
    let ineq = kd[..saddle.m1].iter().fold(0.0f64, |acc, v| acc.max(-v));
    let eq = norm_inf(&kd[saddle.m1..]);
    let bounds = dh
        .iter()
        .zip(saddle.lower.iter().zip(&saddle.upper))
        .fold(0.0f64, |acc, (&di, (&l, &u))| {
            let v = match (l.is_finite(), u.is_finite()) {
                (true, true) => di.abs(),
                (true, false) => (-di).max(0.0),
                (false, true) => di.max(0.0),
                (false, false) => 0.0,
            };
            acc.max(v)
        });
    let margin = -dot(&saddle.c, &dh);
    let residual = ineq.max(eq).max(bounds);
    let valid = residual <= tol && margin >= tol * norm2(&saddle.c).max(1.0);
    Ok(CertificateVerdict {
        valid,
        margin,
        residual,
        normalized: dh,
    })
}

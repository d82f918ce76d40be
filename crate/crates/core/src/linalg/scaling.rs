//! Diagonal preconditioning of the constraint matrix.
//!
//! A scaling `(D1, D2)` turns the saddle problem over `K` into one over
//! `D1 K D2`. Primal iterates of the scaled problem relate to the original by
//! `x = D2 x̃` and dual iterates by `y = D1 ỹ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::DimensionError;
use crate::problem::SaddleForm;

/// Row scale `D1` and column scale `D2`, both strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingInfo {
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

impl ScalingInfo {
    pub fn identity(rows: usize, cols: usize) -> Self {
        Self {
            row_scale: vec![1.0; rows],
            col_scale: vec![1.0; cols],
        }
    }

    /// Scaling equivalent to applying `self` first and `then` second.
    pub fn compose(&self, then: &ScalingInfo) -> ScalingInfo {
        ScalingInfo {
            row_scale: self.row_scale.iter().zip(&then.row_scale).map(|(a, b)| a * b).collect(),
            col_scale: self.col_scale.iter().zip(&then.col_scale).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.row_scale
            .iter()
            .chain(&self.col_scale)
            .all(|d| d.is_finite() && *d > 0.0)
    }
}

fn inv_sqrt_or_one(v: f64) -> f64 {
    if v > 0.0 {
        1.0 / v.sqrt()
    } else {
        1.0
    }
}

/// Ruiz equilibration: repeatedly divides every row and every column by the
/// square root of its infinity norm. Empty rows and columns keep scale 1.
pub fn ruiz_rescale(m: &SparseMatrix, num_iters: usize) -> ScalingInfo {
    let mut info = ScalingInfo::identity(m.rows(), m.cols());
    let mut work = m.clone();
    for _ in 0..num_iters {
        let row: Vec<f64> = work.row_inf_norms().into_iter().map(inv_sqrt_or_one).collect();
        let col: Vec<f64> = work.col_inf_norms().into_iter().map(inv_sqrt_or_one).collect();
        work = work.scaled(&row, &col);
        info = info.compose(&ScalingInfo {
            row_scale: row,
            col_scale: col,
        });
    }
    info
}

/// Diagonal preconditioner with `D1_i = 1/√(Σ_j |M_ij|^(2−α))` and
/// `D2_j = 1/√(Σ_i |M_ij|^α)`. Empty rows and columns keep scale 1.
pub fn pock_chambolle_rescale(m: &SparseMatrix, alpha: f64) -> ScalingInfo {
    assert!((0.0..=2.0).contains(&alpha), "alpha must lie in [0, 2]");
    let row_scale = (0..m.rows())
        .map(|i| inv_sqrt_or_one(m.row(i).1.iter().map(|v| v.abs().powf(2.0 - alpha)).sum()))
        .collect();
    let col_scale = (0..m.cols())
        .map(|j| inv_sqrt_or_one(m.col(j).1.iter().map(|v| v.abs().powf(alpha)).sum()))
        .collect();
    ScalingInfo { row_scale, col_scale }
}

/// Which preconditioner pipeline to run before iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingMode {
    None,
    Ruiz,
    PockChambolle,
    #[default]
    RuizThenPockChambolle,
}

impl fmt::Display for ScalingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingMode::None => "none",
            ScalingMode::Ruiz => "ruiz",
            ScalingMode::PockChambolle => "pc",
            ScalingMode::RuizThenPockChambolle => "ruiz+pc",
        })
    }
}

impl FromStr for ScalingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ScalingMode::None),
            "ruiz" => Ok(ScalingMode::Ruiz),
            "pc" => Ok(ScalingMode::PockChambolle),
            "ruiz+pc" => Ok(ScalingMode::RuizThenPockChambolle),
            other => Err(format!("unknown scaling mode '{other}' (expected none, ruiz, pc or ruiz+pc)")),
        }
    }
}

crate::string_serde!(ScalingMode);

/// Tunables for [`compute_scaling`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub mode: ScalingMode,
    pub ruiz_iterations: usize,
    pub pock_chambolle_alpha: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            mode: ScalingMode::RuizThenPockChambolle,
            ruiz_iterations: 10,
            pock_chambolle_alpha: 1.0,
        }
    }
}

pub fn compute_scaling(m: &SparseMatrix, config: &ScalingConfig) -> ScalingInfo {
    match config.mode {
        ScalingMode::None => ScalingInfo::identity(m.rows(), m.cols()),
        ScalingMode::Ruiz => ruiz_rescale(m, config.ruiz_iterations),
        ScalingMode::PockChambolle => pock_chambolle_rescale(m, config.pock_chambolle_alpha),
        ScalingMode::RuizThenPockChambolle => {
            let ruiz = ruiz_rescale(m, config.ruiz_iterations);
            let partial = m.scaled(&ruiz.row_scale, &ruiz.col_scale);
            ruiz.compose(&pock_chambolle_rescale(&partial, config.pock_chambolle_alpha))
        }
    }
}

/// Builds the scaled problem `K̃ = D1 K D2`, `q̃ = D1 q`, `c̃ = D2 c`,
/// `l̃ = l / D2`, `ũ = u / D2`. Infinite bounds stay infinite.
pub fn apply_scaling(problem: &SaddleForm, scaling: &ScalingInfo) -> Result<SaddleForm, DimensionError> {
    DimensionError::check("row scale", problem.k.rows(), scaling.row_scale.len())?;
    DimensionError::check("column scale", problem.k.cols(), scaling.col_scale.len())?;
    let d1 = &scaling.row_scale;
    let d2 = &scaling.col_scale;
    Ok(SaddleForm {
        k: problem.k.scaled(d1, d2),
        q: problem.q.iter().zip(d1).map(|(q, d)| q * d).collect(),
        m1: problem.m1,
        c: problem.c.iter().zip(d2).map(|(c, d)| c * d).collect(),
        lower: problem.lower.iter().zip(d2).map(|(l, d)| l / d).collect(),
        upper: problem.upper.iter().zip(d2).map(|(u, d)| u / d).collect(),
        objective_offset: problem.objective_offset,
    })
}

/// Maps a point of the scaled problem back: `x = D2 x̃`, `y = D1 ỹ`.
pub fn unscale_solution(
    x_scaled: &[f64],
    y_scaled: &[f64],
    scaling: &ScalingInfo,
) -> Result<(Vec<f64>, Vec<f64>), DimensionError> {
    DimensionError::check("primal vector", scaling.col_scale.len(), x_scaled.len())?;
    DimensionError::check("dual vector", scaling.row_scale.len(), y_scaled.len())?;
    Ok((
        unscale_primal(x_scaled, scaling),
        unscale_dual(y_scaled, scaling),
    ))
}

pub(crate) fn unscale_primal(x_scaled: &[f64], scaling: &ScalingInfo) -> Vec<f64> {
    x_scaled.iter().zip(&scaling.col_scale).map(|(x, d)| x * d).collect()
}

pub(crate) fn unscale_dual(y_scaled: &[f64], scaling: &ScalingInfo) -> Vec<f64> {
    y_scaled.iter().zip(&scaling.row_scale).map(|(y, d)| y * d).collect()
}

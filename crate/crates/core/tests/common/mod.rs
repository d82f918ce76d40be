//! Oracles and fixtures shared by the integration tests and the acceptance run.
#![allow(dead_code)]

pub mod criteria;
pub mod props;
pub mod random;
pub mod simplex;

use std::path::PathBuf;

use pdhg_lp::io::{generate_bilinear_toy, read_mps_file, MpsDialect, MpsFormat};
use pdhg_lp::linalg::SparseMatrix;
use pdhg_lp::problem::to_saddle;
use pdhg_lp::{validate, LpProblem, SaddleForm};

pub const INF: f64 = f64::INFINITY;

pub fn saddle(problem: LpProblem) -> SaddleForm {
    to_saddle(&validate(problem).expect("valid problem"))
}

/// The five small Netlib instances with their published optimal values.
pub const NETLIB: [(&str, f64); 5] = [
    ("afiro", -464.75314286),
    ("sc50a", -64.575077059),
    ("adlittle", 225494.96316),
    ("blend", -30.812149846),
    ("share2b", -415.73224074),
];

pub fn netlib(name: &str) -> LpProblem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data/netlib")
        .join(format!("{name}.mps"));
    let format = match name {
        "afiro" | "adlittle" => MpsFormat::Fixed,
        _ => MpsFormat::Free,
    };
    let dialect = MpsDialect {
        format,
        ..MpsDialect::default()
    };
    read_mps_file(&path, dialect).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// One constructed toy per primal/dual feasibility combination. `scale`
/// multiplies the data that drives divergence.
pub fn feasibility_toys(scale: f64) -> Vec<(Feasibility, Feasibility, LpProblem)> {
    use Feasibility::*;
    // x = −scale, x ≥ 0.
    let primal_infeasible = LpProblem::new(vec![0.0], vec![0.0], vec![INF])
        .with_equalities(SparseMatrix::from_dense(&[vec![1.0]]), vec![-scale])
        .with_name("primal_infeasible");
    // min −scale(x1 + x2) s.t. x1 = x2, x ≥ 0.
    let dual_infeasible = LpProblem::new(vec![-scale, -scale], vec![0.0; 2], vec![INF; 2])
        .with_equalities(SparseMatrix::from_dense(&[vec![1.0, -1.0]]), vec![0.0])
        .with_name("dual_infeasible");
    // min −(x1 + x2) s.t. x1 − x2 ≥ 1, x2 − x1 ≥ 1, x ≥ 0.
    let both = LpProblem::new(vec![-scale, -scale], vec![0.0; 2], vec![INF; 2])
        .with_inequalities(
            SparseMatrix::from_dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]]),
            vec![scale, scale],
        )
        .with_name("both_infeasible");
    vec![
        (Feasible, Feasible, generate_bilinear_toy()),
        (Infeasible, Feasible, primal_infeasible),
        (Feasible, Infeasible, dual_infeasible),
        (Infeasible, Infeasible, both),
    ]
}

/// Least-squares slope of `ln e` against `ln k`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

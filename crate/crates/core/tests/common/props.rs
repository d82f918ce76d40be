//! Property checks shared by the proptest suites and the acceptance run.

use nalgebra::{DMatrix, DVector};
use pdhg_lp::linalg::{apply_scaling, compute_scaling, ruiz_rescale, unscale_solution, ScalingConfig, SparseMatrix};
use pdhg_lp::pdhg::{pdhg_step, project_dual, project_primal, ps_norm, IterateState, NormMode, StepState};
use pdhg_lp::problem::lagrangian;
use pdhg_lp::termination::kkt_error;
use pdhg_lp::{solve, SolverConfig};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::random::random_lp;

const INF: f64 = f64::INFINITY;

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

pub fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    let d = m.to_dense();
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| d[i][j])
}

pub fn exact_norm(m: &SparseMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    dense(m).singular_values().max()
}

#[derive(Debug, Clone)]
pub struct ProjectionCase {
    pub x: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub y: Vec<f64>,
    pub m1: usize,
}

pub fn projection_case() -> impl Strategy<Value = ProjectionCase> {
    (1usize..8, 0usize..6)
        .prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(-1e3..1e3f64, n),
                prop::collection::vec((-10.0..10.0f64, 0.0..10.0f64, 0u8..4), n),
                prop::collection::vec(-1e3..1e3f64, m),
                0..=m,
            )
        })
        .prop_map(|(x, bounds, y, m1)| {
            let (lower, upper) = bounds
                .into_iter()
                .map(|(l, w, kind)| match kind {
                    0 => (l, l + w),
                    1 => (l, INF),
                    2 => (-INF, l),
                    _ => (-INF, INF),
                })
                .unzip();
            ProjectionCase { x, lower, upper, y, m1 }
        })
}

pub fn check_projection(case: &ProjectionCase) -> Result<(), TestCaseError> {
    let px = project_primal(&case.x, &case.lower, &case.upper);
    prop_assert_eq!(&project_primal(&px, &case.lower, &case.upper), &px);
    for ((v, l), u) in px.iter().zip(&case.lower).zip(&case.upper) {
        prop_assert!(l <= v && v <= u);
    }
    let py = project_dual(&case.y, case.m1);
    prop_assert_eq!(&project_dual(&py, case.m1), &py);
    prop_assert!(py[..case.m1].iter().all(|v| *v >= 0.0));
    prop_assert_eq!(&py[case.m1..], &case.y[case.m1..]);
    Ok(())
}

/// Small random LP with a known saddle point, sized from the seed.
pub fn small_known_lp(seed: u64) -> super::random::KnownLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(1..5);
    let m_ineq = rng.gen_range(0..3);
    let m_eq = rng.gen_range(if m_ineq == 0 { 1 } else { 0 }..3);
    random_lp(seed, n, m_ineq, m_eq, 0.7)
}

/// PDHG with `s ≤ 0.9/‖K‖₂` never moves away from a saddle point in the
/// `P_s` geometry.
pub fn check_ps_nonexpansive(seed: u64) -> Result<(), TestCaseError> {
    let known = small_known_lp(seed);
    let saddle = super::saddle(known.problem);
    let norm_k = exact_norm(&saddle.k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = rng.gen_range(0.1..=0.9) / norm_k;
    let step = StepState::new(s, rng.gen_range(0.5..2.0));
    let x0: Vec<f64> = (0..saddle.num_vars()).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let y0: Vec<f64> = (0..saddle.num_rows()).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let mut state = IterateState::new(&saddle, &x0, &y0);
    let star = (known.x_star.as_slice(), known.y_star.as_slice());
    let dist = |st: &IterateState| ps_norm(&saddle.k, norm_k, (&st.x, &st.y), star, &step, NormMode::PsQuadratic).unwrap();
    let mut prev = dist(&state);
    for k in 0..200 {
        pdhg_step(&mut state, &saddle, &step).unwrap();
        let now = dist(&state);
        prop_assert!(now <= prev + 1e-12 * (1.0 + prev), "iteration {}: {} > {}", k, now, prev);
        prev = now;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MatvecCase {
    pub rows: usize,
    pub cols: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn matvec_case() -> impl Strategy<Value = MatvecCase> {
    (1usize..9, 1usize..9)
        .prop_flat_map(|(rows, cols)| {
            (
                Just(rows),
                Just(cols),
                prop::collection::vec((0..rows, 0..cols, -10.0..10.0f64), 0..40),
                prop::collection::vec(-10.0..10.0f64, cols),
                prop::collection::vec(-10.0..10.0f64, rows),
            )
        })
        .prop_map(|(rows, cols, triplets, x, y)| MatvecCase { rows, cols, triplets, x, y })
}

pub fn check_matvec(case: &MatvecCase) -> Result<(), TestCaseError> {
    let m = SparseMatrix::from_triplets(case.rows, case.cols, case.triplets.iter().copied()).unwrap();
    prop_assert!(m.is_well_formed());
    let mut oracle = DMatrix::<f64>::zeros(case.rows, case.cols);
    for &(i, j, v) in &case.triplets {
        oracle[(i, j)] += v;
    }
    let ax = &oracle * DVector::from_column_slice(&case.x);
    let aty = oracle.transpose() * DVector::from_column_slice(&case.y);
    let scale = 1.0 + oracle.abs().max() * 10.0 * (case.rows.max(case.cols) as f64);
    for (got, want) in m.matvec(&case.x).unwrap().iter().zip(ax.iter()) {
        prop_assert!((got - want).abs() <= 1e-13 * scale, "{} vs {}", got, want);
    }
    for (got, want) in m.matvec_transpose(&case.y).unwrap().iter().zip(aty.iter()) {
        prop_assert!((got - want).abs() <= 1e-13 * scale, "{} vs {}", got, want);
    }
    Ok(())
}

/// Dense matrix with no zero rows or columns and entries spanning four
/// orders of magnitude.
pub fn ruiz_case() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..8, 1usize..8)
        .prop_flat_map(|(rows, cols)| {
            prop::collection::vec(prop::collection::vec((any::<bool>(), -2.0..2.0f64, any::<bool>()), cols), rows)
        })
        .prop_map(|cells| {
            let mut m: Vec<Vec<f64>> = cells
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&(keep, e, neg)| {
                            let v = 10f64.powf(e);
                            if keep {
                                if neg {
                                    -v
                                } else {
                                    v
                                }
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let cols = m[0].len();
            for (i, row) in m.iter_mut().enumerate() {
                let j = i % cols;
                if row[j] == 0.0 {
                    row[j] = 1.0;
                }
            }
            let rows = m.len();
            for j in 0..cols {
                if m.iter().all(|row| row[j] == 0.0) {
                    m[j % rows][j] = 1.0;
                }
            }
            m
        })
}

pub fn check_ruiz(rows: &[Vec<f64>]) -> Result<(), TestCaseError> {
    let m = SparseMatrix::from_dense(rows);
    let info = ruiz_rescale(&m, 20);
    prop_assert!(info.is_valid());
    let scaled = m.scaled(&info.row_scale, &info.col_scale);
    for v in scaled.row_inf_norms().into_iter().chain(scaled.col_inf_norms()) {
        prop_assert!((v - 1.0).abs() <= 1e-4, "norm {}", v);
    }
    Ok(())
}

/// Scaling a point into the preconditioned space and back leaves its KKT
/// residuals on the original problem unchanged, and the Lagrangian is the
/// same in both spaces.
pub fn check_scaling_round_trip(seed: u64) -> Result<(), TestCaseError> {
    let known = small_known_lp(seed);
    let saddle = super::saddle(known.problem);
    let info = compute_scaling(&saddle.k, &ScalingConfig::default());
    let scaled = apply_scaling(&saddle, &info).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = project_primal(
        &known.x_star.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect::<Vec<_>>(),
        &saddle.lower,
        &saddle.upper,
    );
    let y = project_dual(
        &known.y_star.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect::<Vec<_>>(),
        saddle.m1,
    );
    let xs: Vec<f64> = x.iter().zip(&info.col_scale).map(|(v, d)| v / d).collect();
    let ys: Vec<f64> = y.iter().zip(&info.row_scale).map(|(v, d)| v / d).collect();
    let (xb, yb) = unscale_solution(&xs, &ys, &info).unwrap();
    let before = kkt_error(&saddle, &x, &y).unwrap();
    let after = kkt_error(&saddle, &xb, &yb).unwrap();
    prop_assert!(close(before.primal_residual_norm, after.primal_residual_norm, 1e-10));
    prop_assert!(close(before.dual_residual_norm, after.dual_residual_norm, 1e-10));
    prop_assert!(close(before.duality_gap_abs, after.duality_gap_abs, 1e-10));
    let l = lagrangian(&saddle, &x, &y).unwrap();
    let ls = lagrangian(&scaled, &xs, &ys).unwrap();
    prop_assert!(close(l, ls, 1e-10), "{} vs {}", l, ls);
    Ok(())
}

pub fn check_determinism(seed: u64) -> Result<(), TestCaseError> {
    let known = random_lp(seed, 6, 3, 2, 0.6);
    let mut config = SolverConfig::default();
    config.termination.iteration_limit = 20_000;
    let a = solve(known.problem.clone(), &config).unwrap();
    let b = solve(known.problem, &config).unwrap();
    prop_assert_eq!(a.without_timings(), b.without_timings());
    Ok(())
}

/// Proptest settings without regression files, which integration tests
/// cannot locate.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

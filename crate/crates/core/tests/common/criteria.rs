//! Measurements behind the acceptance criteria, shared with the test suites.

use pdhg_lp::io::generate_bilinear_toy;
use pdhg_lp::linalg::{distance, ScalingMode};
use pdhg_lp::pdhg::{pdhg_step, project_dual, project_primal, ps_norm, IterateState, NormMode, StepState};
use pdhg_lp::problem::lagrangian;
use pdhg_lp::restart::{normalized_duality_gap, RestartScheme};
use pdhg_lp::step::{StepMode, WeightMode};
use pdhg_lp::{solve, SolveStatus, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gap::brute_force_gap;
use super::props::small_known_lp;
use super::random::random_lp;
use super::{log_log_slope, median, saddle};

pub const TOY_START: (f64, f64) = (2.0, 2.0);
pub const TOY_STEP: f64 = 0.2;

/// Fixed-step PDHG iterates `z^0, …, z^iters` on the bilinear toy.
pub fn toy_trajectory(start: (f64, f64), iters: usize) -> Vec<(f64, f64)> {
    let toy = saddle(generate_bilinear_toy());
    let step = StepState::new(TOY_STEP, 1.0);
    let mut state = IterateState::new(&toy, &[start.0], &[start.1]);
    let mut out = Vec::with_capacity(iters + 1);
    out.push((state.x[0], state.y[0]));
    for _ in 0..iters {
        pdhg_step(&mut state, &toy, &step).unwrap();
        out.push((state.x[0], state.y[0]));
    }
    out
}

pub struct ToyConvergence {
    /// First iteration within 1e-6 of the saddle point.
    pub first_within_tolerance: Option<usize>,
    /// Iterations after the burn-in where the Euclidean distance did not drop.
    pub euclidean_non_decreases: usize,
    /// The same count in the `P_s` geometry.
    pub ps_non_decreases: usize,
}

pub fn toy_convergence(iters: usize, burn_in: usize) -> ToyConvergence {
    let traj = toy_trajectory(TOY_START, iters);
    let toy = saddle(generate_bilinear_toy());
    let step = StepState::new(TOY_STEP, 1.0);
    let euclid: Vec<f64> = traj.iter().map(|&(x, y)| ((x - 3.0).powi(2) + y * y).sqrt()).collect();
    let ps: Vec<f64> = traj
        .iter()
        .map(|&(x, y)| ps_norm(&toy.k, 1.0, (&[x], &[y]), (&[3.0], &[0.0]), &step, NormMode::PsQuadratic).unwrap())
        .collect();
    // Past 1e-12 the distances are at rounding level and carry no signal.
    let count = |d: &[f64]| (burn_in + 1..d.len()).filter(|&k| d[k - 1] > 1e-12 && d[k] >= d[k - 1]).count();
    ToyConvergence {
        first_within_tolerance: euclid.iter().position(|d| *d < 1e-6),
        euclidean_non_decreases: count(&euclid),
        ps_non_decreases: count(&ps),
    }
}

/// Largest `L(x̄ᵏ, y) − L(x, ȳᵏ) − ‖z − z⁰‖²_{P_s}/(2k)` over `k ≤ kmax` and
/// the test points: the saddle point and `extra_points` random points of `Z`.
/// Nonpositive means the average-iterate bound holds.
pub fn average_gap_bound_excess(kmax: usize, extra_points: usize, seed: u64) -> f64 {
    let toy = saddle(generate_bilinear_toy());
    let step = StepState::new(TOY_STEP, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![(3.0, 0.0)];
    points.extend((0..extra_points).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(-10.0..10.0))));
    let (x0, y0) = TOY_START;
    let radii: Vec<f64> = points
        .iter()
        .map(|&(x, y)| ps_norm(&toy.k, 1.0, (&[x], &[y]), (&[x0], &[y0]), &step, NormMode::PsQuadratic).unwrap())
        .collect();
    let mut state = IterateState::new(&toy, &[x0], &[y0]);
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut worst = f64::NEG_INFINITY;
    for k in 1..=kmax {
        pdhg_step(&mut state, &toy, &step).unwrap();
        sx += state.x[0];
        sy += state.y[0];
        let (xb, yb) = (sx / k as f64, sy / k as f64);
        for (&(x, y), &r2) in points.iter().zip(&radii) {
            let gap = lagrangian(&toy, &[xb], &[y]).unwrap() - lagrangian(&toy, &[x], &[yb]).unwrap();
            worst = worst.max(gap - r2 / (2.0 * k as f64));
        }
    }
    worst
}

/// Worst relative disagreement between the bisection gap and the exhaustive
/// oracle over random instances with at most six coordinates.
pub fn gap_oracle_disagreement(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < instances {
        let known = small_known_lp(rng.gen());
        let s = saddle(known.problem);
        if s.num_vars() + s.num_rows() > 6 {
            continue;
        }
        let x: Vec<f64> = (0..s.num_vars()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..s.num_rows()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let x = project_primal(&x, &s.lower, &s.upper);
        let y = project_dual(&y, s.m1);
        let r = 10f64.powf(rng.gen_range(-1.0..1.0));
        let fast = normalized_duality_gap(&s, &x, &y, r).unwrap();
        let slow = brute_force_gap(&s, &x, &y, r);
        worst = worst.max((fast - slow).abs() / slow.abs().max(1e-12));
        done += 1;
    }
    worst
}

/// Log-log slope of `‖v − (zᵏ − z⁰)/k‖` against `k` on the infeasible toy
/// `{x = −1, x ≥ 0}`, with `v` taken from the normalized iterate at `k_ref`.
pub fn infeasible_rate_slope(k_lo: usize, k_hi: usize, k_ref: usize) -> f64 {
    let toy = saddle(super::feasibility_toys(1.0).swap_remove(1).2);
    let step = StepState::new(TOY_STEP, 1.0);
    let (x0, y0) = TOY_START;
    let mut state = IterateState::new(&toy, &[x0], &[y0]);
    let samples = 40;
    let ks: Vec<usize> = (0..=samples)
        .map(|i| {
            let e = (k_lo as f64).ln() + (k_hi as f64 / k_lo as f64).ln() * i as f64 / samples as f64;
            e.exp().round() as usize
        })
        .collect();
    let mut normalized = Vec::new();
    for k in 1..=k_ref {
        pdhg_step(&mut state, &toy, &step).unwrap();
        if ks.contains(&k) && normalized.last().is_none_or(|(kk, _, _)| *kk != k) {
            normalized.push((k, (state.x[0] - x0) / k as f64, (state.y[0] - y0) / k as f64));
        }
    }
    let v = ((state.x[0] - x0) / k_ref as f64, (state.y[0] - y0) / k_ref as f64);
    let points: Vec<(f64, f64)> = normalized
        .iter()
        .map(|&(k, nx, ny)| (k as f64, distance(&[nx, ny], &[v.0, v.1])))
        .collect();
    log_log_slope(&points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    Vanilla,
    Scaled,
    ScaledRestarted,
    Full,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Ablation::Vanilla, Ablation::Scaled, Ablation::ScaledRestarted, Ablation::Full];

    pub fn config(self, iteration_limit: usize) -> SolverConfig {
        let mut config = SolverConfig::default();
        config.termination.iteration_limit = iteration_limit;
        if self == Ablation::Full {
            return config;
        }
        config.step.mode = StepMode::Fixed(None);
        config.weight.mode = WeightMode::Fixed(1.0);
        if self == Ablation::Vanilla {
            config.scaling.mode = ScalingMode::None;
        }
        if self != Ablation::ScaledRestarted {
            config.restart.scheme = RestartScheme::None;
        }
        config
    }
}

/// Median iterations to optimality per ablation stage over seeded random
/// LPs. Runs that hit the limit count as the limit.
pub fn ablation_medians(seeds: std::ops::Range<u64>, n: usize, m: usize, iteration_limit: usize) -> Vec<(Ablation, f64, usize)> {
    let problems: Vec<_> = seeds.map(|s| random_lp(s, n, 2 * m / 3, m - 2 * m / 3, 0.3).problem).collect();
    Ablation::ALL
        .iter()
        .map(|&stage| {
            let config = stage.config(iteration_limit);
            let mut unsolved = 0;
            let mut iters: Vec<f64> = problems
                .iter()
                .map(|p| {
                    let r = solve(p.clone(), &config).unwrap();
                    if r.status != SolveStatus::Optimal {
                        unsolved += 1;
                    }
                    r.iterations as f64
                })
                .collect();
            (stage, median(&mut iters), unsolved)
        })
        .collect()
}

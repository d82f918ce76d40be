//! The full solve: validate, precondition, iterate with the step, restart
//! and termination policies, then map the result back to original units.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::linalg::{
    apply_scaling, compute_scaling, spectral_norm_estimate, unscale_dual, unscale_primal, ScalingConfig, ScalingInfo,
    ScalingMode,
};
use crate::pdhg::{IterateState, StepState};
use crate::problem::{to_saddle, validate, LpProblem, SaddleForm, ValidationError};
use crate::restart::{
    candidate_gap, fixed_period_from_sharpness, point_distance, should_restart, CandidateKind, CandidateRule,
    EpochSnapshot, GapPair, RestartConfig, RestartDecision, RestartScheme,
};
use crate::step::{adaptive_step, initialize_step_state, update_primal_weight, StepMode, StepPolicy, WeightMode, WeightPolicy};
use crate::termination::{
    check_dual_infeasible, check_optimal, check_primal_infeasible, extract_certificates, kkt_error,
    CertificateVerdict, KktReport, TerminationCriteria,
};

/// Power-iteration settings for `‖K‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SolverConfig {
    pub scaling: ScalingConfig,
    pub restart: RestartConfig,
    pub step: StepPolicy,
    pub weight: WeightPolicy,
    pub termination: TerminationCriteria,
    pub spectral: SpectralConfig,
    /// Log progress at the first check at least this many iterations after
    /// the previous log line; 0 disables logging.
    pub log_interval: usize,
    /// Keep every iterate (in original units) in the report.
    pub record_trajectory: bool,
}

impl SolverConfig {
    /// Plain PDHG: no scaling, no restarts, constant step `s`, `ω = 1`.
    pub fn vanilla(step_size: f64, max_iters: usize) -> Self {
        let mut config = SolverConfig::default();
        config.scaling.mode = ScalingMode::None;
        config.restart.scheme = RestartScheme::None;
        config.step.mode = StepMode::Fixed(Some(step_size));
        config.weight.mode = WeightMode::Fixed(1.0);
        config.termination.iteration_limit = max_iters;
        config
    }

    pub fn validate(&self) -> Result<(), String> {
        self.restart.validate()?;
        self.step.validate()?;
        self.weight.validate()?;
        self.termination.validate()?;
        if !(self.spectral.tolerance > 0.0) {
            return Err("spectral tolerance must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    TimeLimit,
    NumericalError,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal_infeasible",
            SolveStatus::DualInfeasible => "dual_infeasible",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NumericalError => "numerical_error",
        };
        f.write_str(s)
    }
}

/// Relative residuals at one termination check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub iteration: usize,
    pub rel_primal_residual: f64,
    pub rel_dual_residual: f64,
    pub rel_duality_gap: f64,
    pub step_size: f64,
    pub primal_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PhaseTimings {
    pub validate_sec: f64,
    pub scaling_sec: f64,
    pub iterate_sec: f64,
    pub total_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem_name: String,
    pub status: SolveStatus,
    /// Primal objective with offset and sign restored.
    pub objective: f64,
    /// Dual objective with offset and sign restored.
    pub dual_objective: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// KKT residuals of `(x, y)` on the original problem.
    pub kkt: KktReport,
    pub primal_infeasibility_certificate: Option<Vec<f64>>,
    pub dual_infeasibility_certificate: Option<Vec<f64>>,
    pub certificate_margin: Option<f64>,
    pub iterations: usize,
    pub restarts: usize,
    pub matvecs: u64,
    pub step_retries: u64,
    pub final_step_size: f64,
    pub final_primal_weight: f64,
    pub message: Option<String>,
    pub timings: PhaseTimings,
    pub residual_history: Vec<ResidualSample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    pub config: SolverConfig,
}

impl SolveReport {
    /// Copy with wall-clock fields zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> SolveReport {
        SolveReport {
            timings: PhaseTimings::default(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

/// Snapshot handed to the progress callback at every termination check.
#[derive(Debug, Clone, Copy)]
pub struct Progress<'a> {
    pub iteration: usize,
    pub kkt: &'a KktReport,
    pub primal_weight: f64,
    pub step_size: f64,
}

type ProgressFn<'a> = Box<dyn FnMut(&Progress<'_>) + 'a>;
type TransformFn<'a> = Box<dyn Fn(LpProblem) -> LpProblem + 'a>;

/// A configured solve with optional hooks.
pub struct Solver<'a> {
    config: SolverConfig,
    progress: Option<ProgressFn<'a>>,
    transform: Option<TransformFn<'a>>,
    initial_point: Option<(Vec<f64>, Vec<f64>)>,
}

impl<'a> Solver<'a> {
    pub fn new(config: SolverConfig) -> Self {
        Self {
            config,
            progress: None,
            transform: None,
            initial_point: None,
        }
    }

    /// Called synchronously at every termination check.
    pub fn with_progress(mut self, f: impl FnMut(&Progress<'_>) + 'a) -> Self {
        self.progress = Some(Box::new(f));
        self
    }

    /// Problem-to-problem transform run before validation, e.g. a presolve.
    pub fn with_transform(mut self, f: impl Fn(LpProblem) -> LpProblem + 'a) -> Self {
        self.transform = Some(Box::new(f));
        self
    }

    /// Starting point in original units; the origin by default.
    pub fn with_initial_point(mut self, x: Vec<f64>, y: Vec<f64>) -> Self {
        self.initial_point = Some((x, y));
        self
    }

    pub fn solve(&mut self, problem: LpProblem) -> Result<SolveReport, SolveError> {
        self.config.validate().map_err(SolveError::Config)?;
        let started = Instant::now();
        let problem = match &self.transform {
            Some(f) => f(problem),
            None => problem,
        };
        let validated = validate(problem)?;
        let validate_sec = started.elapsed().as_secs_f64();

        let scaling_start = Instant::now();
        let original = to_saddle(&validated);
        let scaling = compute_scaling(&original.k, &self.config.scaling);
        let saddle = apply_scaling(&original, &scaling).expect("scaling matches the problem");
        let scaling_sec = scaling_start.elapsed().as_secs_f64();

        if let Some((x, y)) = &self.initial_point {
            if x.len() != saddle.num_vars() || y.len() != saddle.num_rows() {
                return Err(SolveError::Config("initial point has the wrong dimensions".into()));
            }
        }

        let iterate_start = Instant::now();
        let mut run = Run::new(&self.config, &original, &saddle, &scaling, self.initial_point.as_ref());
        run.iterate(&mut self.progress, started);
        let iterate_sec = iterate_start.elapsed().as_secs_f64();

        let mut report = run.finish(&validated);
        report.timings = PhaseTimings {
            validate_sec,
            scaling_sec,
            iterate_sec,
            total_sec: started.elapsed().as_secs_f64(),
        };
        Ok(report)
    }
}

/// Solves `problem` with `config`.
pub fn solve(problem: LpProblem, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    Solver::new(config.clone()).solve(problem)
}

/// Plain PDHG baseline with constant step `s` and the usual termination checks.
pub fn solve_vanilla(problem: LpProblem, step_size: f64, max_iters: usize) -> Result<SolveReport, SolveError> {
    if !(step_size > 0.0) {
        return Err(SolveError::Config(format!("step size must be positive, got {step_size}")));
    }
    solve(problem, &SolverConfig::vanilla(step_size, max_iters))
}

/// A certificate that passed its check, in original units.
struct FoundCertificate {
    vector: Vec<f64>,
    margin: f64,
}

/// Mutable state of one solve.
struct Run<'p> {
    config: &'p SolverConfig,
    original: &'p SaddleForm,
    saddle: &'p SaddleForm,
    scaling: &'p ScalingInfo,
    state: IterateState,
    step: StepState,
    initial_step_size: f64,
    fixed_period: Option<usize>,
    snapshot: EpochSnapshot,
    extra_matvecs: u64,
    step_retries: u64,
    /// Iterate before the most recent step, kept only ahead of checks.
    previous: Option<(Vec<f64>, Vec<f64>)>,
    primal_streak: usize,
    dual_streak: usize,
    history: Vec<ResidualSample>,
    trajectory: Option<Vec<TrajectoryPoint>>,
    last_logged: Option<usize>,
    outcome: Option<Outcome>,
}

struct Outcome {
    status: SolveStatus,
    /// Output point in original units.
    x: Vec<f64>,
    y: Vec<f64>,
    kkt: Option<KktReport>,
    primal_certificate: Option<FoundCertificate>,
    dual_certificate: Option<FoundCertificate>,
    message: Option<String>,
}

impl<'p> Run<'p> {
    fn new(
        config: &'p SolverConfig,
        original: &'p SaddleForm,
        saddle: &'p SaddleForm,
        scaling: &'p ScalingInfo,
        initial_point: Option<&(Vec<f64>, Vec<f64>)>,
    ) -> Self {
        let mut extra_matvecs = 0;
        let needs_norm = matches!(config.step.mode, StepMode::Fixed(None))
            || matches!(config.restart.scheme, RestartScheme::Sharpness(_));
        let norm_k = needs_norm.then(|| {
            let est = spectral_norm_estimate(
                &saddle.k,
                config.spectral.tolerance,
                config.spectral.max_iterations,
                config.spectral.seed,
            );
            extra_matvecs += 2 * est.iterations as u64;
            if !est.converged {
                log::warn!("power iteration did not converge; using ‖K‖₂ ≈ {:.6e}", est.value);
            }
            est.value
        });
        let fixed_period = match (config.restart.scheme, norm_k) {
            (RestartScheme::Sharpness(a), Some(nk)) => Some(fixed_period_from_sharpness(nk, a).unwrap_or(1)),
            _ => None,
        };
        let step = initialize_step_state(saddle, norm_k, &config.step, &config.weight);
        let state = match initial_point {
            Some((x, y)) => {
                let xs: Vec<f64> = x.iter().zip(&scaling.col_scale).map(|(v, d)| v / d).collect();
                let ys: Vec<f64> = y.iter().zip(&scaling.row_scale).map(|(v, d)| v / d).collect();
                IterateState::new(saddle, &xs, &ys)
            }
            None => IterateState::at_origin(saddle),
        };
        let snapshot = EpochSnapshot::new(saddle, &state.x, &state.y, state.kx(), state.kty(), None);
        let trajectory = config.record_trajectory.then(Vec::new);
        let mut run = Self {
            config,
            original,
            saddle,
            scaling,
            state,
            initial_step_size: step.step_size,
            step,
            fixed_period,
            snapshot,
            extra_matvecs,
            step_retries: 0,
            previous: None,
            primal_streak: 0,
            dual_streak: 0,
            history: Vec::new(),
            trajectory,
            last_logged: None,
            outcome: None,
        };
        run.record_point();
        run
    }

    fn unscaled(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (unscale_primal(x, self.scaling), unscale_dual(y, self.scaling))
    }

    fn record_point(&mut self) {
        if self.trajectory.is_none() {
            return;
        }
        let (x, y) = self.unscaled(&self.state.x, &self.state.y);
        if let Some(points) = &mut self.trajectory {
            points.push(TrajectoryPoint { x, y });
        }
    }

    fn stop(&mut self, status: SolveStatus, x: Vec<f64>, y: Vec<f64>, kkt: Option<KktReport>) {
        self.outcome = Some(Outcome {
            status,
            x,
            y,
            kkt,
            primal_certificate: None,
            dual_certificate: None,
            message: None,
        });
    }

    fn iterate(&mut self, progress: &mut Option<ProgressFn<'_>>, started: Instant) {
        let interval = self.config.termination.check_interval;
        loop {
            if self.state.total_count.is_multiple_of(interval) {
                self.termination_check(progress, started);
                if self.outcome.is_some() {
                    return;
                }
            }
            if (self.state.total_count + 1).is_multiple_of(interval) {
                self.previous = Some((self.state.x.clone(), self.state.y.clone()));
            }
            if let Err(message) = self.take_step() {
                let (x, y) = self.unscaled(&self.state.x, &self.state.y);
                self.stop(SolveStatus::NumericalError, x, y, None);
                self.outcome.as_mut().unwrap().message = Some(message);
                return;
            }
            self.record_point();
            self.maybe_restart();
        }
    }

    fn take_step(&mut self) -> Result<(), String> {
        match self.config.step.mode {
            StepMode::Fixed(_) => {
                self.state.propose(self.saddle, &self.step);
                self.state.accept(self.saddle, 1.0).map_err(|e| e.to_string())
            }
            StepMode::Adaptive => {
                let out = adaptive_step(
                    &mut self.state,
                    self.saddle,
                    &mut self.step,
                    &self.config.step,
                    self.initial_step_size,
                )
                .map_err(|e| e.to_string())?;
                self.step_retries += out.rejected_trials as u64;
                Ok(())
            }
        }
    }

    fn termination_check(&mut self, progress: &mut Option<ProgressFn<'_>>, started: Instant) {
        let criteria = &self.config.termination;
        let (xc, yc) = self.unscaled(&self.state.x, &self.state.y);
        let mut best = kkt_error(self.original, &xc, &yc).expect("dimensions checked");
        let mut best_point = (xc, yc);
        self.extra_matvecs += 2;
        if self.state.inner_count > 0 {
            let (ax, ay) = self.state.average();
            let (xa, ya) = self.unscaled(&ax, &ay);
            let avg = kkt_error(self.original, &xa, &ya).expect("dimensions checked");
            self.extra_matvecs += 2;
            if avg.max_relative() < best.max_relative() {
                best = avg;
                best_point = (xa, ya);
            }
        }
        let iteration = self.state.total_count;
        self.history.push(ResidualSample {
            iteration,
            rel_primal_residual: best.rel_primal_residual,
            rel_dual_residual: best.rel_dual_residual,
            rel_duality_gap: best.rel_duality_gap,
            step_size: self.step.step_size,
            primal_weight: self.step.primal_weight,
        });
        if let Some(f) = progress.as_mut() {
            f(&Progress {
                iteration,
                kkt: &best,
                primal_weight: self.step.primal_weight,
                step_size: self.step.step_size,
            });
        }
        if self.config.log_interval > 0
            && self.last_logged.is_none_or(|last| iteration >= last + self.config.log_interval)
        {
            log::info!(
                "iter {iteration:>8}  primal {:.3e}  dual {:.3e}  gap {:.3e}  step {:.3e}  weight {:.3e}  restarts {}",
                best.rel_primal_residual,
                best.rel_dual_residual,
                best.rel_duality_gap,
                self.step.step_size,
                self.step.primal_weight,
                self.state.epoch_index
            );
            self.last_logged = Some(iteration);
        }
        if check_optimal(&best, criteria) {
            let (x, y) = best_point;
            self.stop(SolveStatus::Optimal, x, y, Some(best));
            return;
        }

        if iteration > 0 {
            let (primal, dual) = self.certificate_check();
            self.primal_streak = if primal.is_some() { self.primal_streak + 1 } else { 0 };
            self.dual_streak = if dual.is_some() { self.dual_streak + 1 } else { 0 };
            let status = if self.primal_streak >= 2 {
                Some(SolveStatus::PrimalInfeasible)
            } else if self.dual_streak >= 2 {
                Some(SolveStatus::DualInfeasible)
            } else {
                None
            };
            if let Some(status) = status {
                let (x, y) = self.unscaled(&self.state.x, &self.state.y);
                self.stop(status, x, y, None);
                let outcome = self.outcome.as_mut().unwrap();
                match status {
                    SolveStatus::PrimalInfeasible => outcome.primal_certificate = primal,
                    _ => outcome.dual_certificate = dual,
                }
                return;
            }
        }

        if iteration >= criteria.iteration_limit {
            let (x, y) = best_point;
            self.stop(SolveStatus::IterationLimit, x, y, Some(best));
            return;
        }
        if let Some(limit) = criteria.time_limit_seconds {
            if started.elapsed().as_secs_f64() >= limit {
                let (x, y) = best_point;
                self.stop(SolveStatus::TimeLimit, x, y, Some(best));
            }
        }
    }

    /// Best valid primal- and dual-infeasibility certificates among the
    /// candidates at this check.
    fn certificate_check(&mut self) -> (Option<FoundCertificate>, Option<FoundCertificate>) {
        let tol = self.config.termination.tol_infeas;
        let current = (&self.state.x[..], &self.state.y[..]);
        let origin = (&self.snapshot.start_x[..], &self.snapshot.start_y[..]);
        let mut candidates = Vec::new();
        if self.state.inner_count >= 1 {
            let previous = self.previous.as_ref().map(|(x, y)| (&x[..], &y[..])).unwrap_or(current);
            candidates = extract_certificates(previous, current, origin, self.state.inner_count, self.state.total_count);
            if self.previous.is_none() {
                candidates.remove(0);
            }
        } else if let Some((px, py)) = &self.previous {
            // The last step was followed by a restart; only the difference is usable.
            let mut c = extract_certificates((px, py), current, current, 1, self.state.total_count);
            c.truncate(1);
            candidates = c;
        }
        let mut primal: Option<FoundCertificate> = None;
        let mut dual: Option<FoundCertificate> = None;
        let keep = |slot: &mut Option<FoundCertificate>, verdict: CertificateVerdict| {
            if verdict.valid && slot.as_ref().is_none_or(|f| verdict.margin > f.margin) {
                *slot = Some(FoundCertificate {
                    vector: verdict.normalized,
                    margin: verdict.margin,
                });
            }
        };
        for cand in &candidates {
            let y_ray = unscale_dual(&cand.y, self.scaling);
            if let Ok(v) = check_primal_infeasible(self.original, &y_ray, tol) {
                self.extra_matvecs += 1;
                keep(&mut primal, v);
            }
            let x_ray = unscale_primal(&cand.x, self.scaling);
            if let Ok(v) = check_dual_infeasible(self.original, &x_ray, tol) {
                self.extra_matvecs += 1;
                keep(&mut dual, v);
            }
        }
        self.previous = None;
        (primal, dual)
    }

    fn maybe_restart(&mut self) {
        let cfg = &self.config.restart;
        let decision = match cfg.scheme {
            RestartScheme::None => RestartDecision::Continue,
            RestartScheme::Fixed(_) | RestartScheme::Sharpness(_) => {
                should_restart(&self.state, cfg, self.fixed_period, None)
            }
            RestartScheme::Adaptive => {
                let inner = self.state.inner_count;
                let due = inner.is_multiple_of(cfg.evaluation_interval)
                    || self.state.total_count.is_multiple_of(self.config.termination.check_interval)
                    || inner >= cfg.artificial_cap(self.state.total_count);
                if !due {
                    return;
                }
                let gaps = self.restart_gaps();
                should_restart(&self.state, cfg, None, Some(gaps))
            }
        };
        if let RestartDecision::RestartTo(kind) = decision {
            let (x, y) = match kind {
                CandidateKind::Average => self.state.average(),
                CandidateKind::Current => (self.state.x.clone(), self.state.y.clone()),
            };
            self.restart_to(x, y);
        }
    }

    fn restart_gaps(&mut self) -> GapPair {
        let (ax, ay) = self.state.average();
        let (gap_avg, radius_avg, mv) = candidate_gap(self.saddle, &self.snapshot, &ax, &ay, None);
        self.extra_matvecs += mv;
        let mut pair = GapPair {
            kind: CandidateKind::Average,
            candidate: gap_avg,
            candidate_radius: radius_avg,
            reference: self.snapshot.gap_at_start,
        };
        if self.config.restart.candidate_rule == CandidateRule::BestOfAverageAndCurrent {
            let products = (self.state.kx(), self.state.kty());
            let (gap_cur, radius_cur, _) =
                candidate_gap(self.saddle, &self.snapshot, &self.state.x, &self.state.y, Some(products));
            if radius_cur > 0.0 && (radius_avg == 0.0 || gap_cur < gap_avg) {
                pair.kind = CandidateKind::Current;
                pair.candidate = gap_cur;
                pair.candidate_radius = radius_cur;
            }
        }
        pair
    }

    fn restart_to(&mut self, x: Vec<f64>, y: Vec<f64>) {
        let old_x = std::mem::take(&mut self.snapshot.start_x);
        let old_y = std::mem::take(&mut self.snapshot.start_y);
        let dx = point_distance((&x, &[]), (&old_x, &[]));
        let dy = point_distance((&[], &y), (&[], &old_y));
        self.step.primal_weight = update_primal_weight(self.step.primal_weight, dx, dy, &self.config.weight);
        self.state.restart_to(self.saddle, x, y);
        self.snapshot = EpochSnapshot::new(
            self.saddle,
            &self.state.x,
            &self.state.y,
            self.state.kx(),
            self.state.kty(),
            Some((old_x, old_y)),
        );
    }

    fn finish(self, problem: &LpProblem) -> SolveReport {
        let outcome = self.outcome.expect("iteration ends with an outcome");
        let kkt = match outcome.kkt {
            Some(k) => k,
            None => kkt_error(self.original, &outcome.x, &outcome.y).expect("dimensions checked"),
        };
        let certificate_margin = outcome
            .primal_certificate
            .as_ref()
            .or(outcome.dual_certificate.as_ref())
            .map(|c| c.margin);
        SolveReport {
            problem_name: problem.name.clone(),
            status: outcome.status,
            objective: problem.reported_objective(kkt.primal_objective),
            dual_objective: problem.reported_objective(kkt.dual_objective),
            reduced_costs: kkt.reduced_costs.clone(),
            x: outcome.x,
            y: outcome.y,
            kkt,
            primal_infeasibility_certificate: outcome.primal_certificate.map(|c| c.vector),
            dual_infeasibility_certificate: outcome.dual_certificate.map(|c| c.vector),
            certificate_margin,
            iterations: self.state.total_count,
            restarts: self.state.epoch_index,
            matvecs: self.state.matvecs + self.extra_matvecs,
            step_retries: self.step_retries,
            final_step_size: self.step.step_size,
            final_primal_weight: self.step.primal_weight,
            message: outcome.message,
            timings: PhaseTimings::default(),
            residual_history: self.history,
            trajectory: self.trajectory,
            config: self.config.clone(),
        }
    }
}

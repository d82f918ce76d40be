//! Adaptive step-size line search and primal-weight updates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::norm2;
use crate::pdhg::{IterateState, PdhgError, StepState};
use crate::problem::SaddleForm;

/// Text forms: `fixed` (0.9/‖K‖₂), `fixed=S`, `adaptive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    Fixed(Option<f64>),
    Adaptive,
}

impl fmt::Display for StepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepMode::Fixed(None) => write!(f, "fixed"),
            StepMode::Fixed(Some(s)) => write!(f, "fixed={s}"),
            StepMode::Adaptive => write!(f, "adaptive"),
        }
    }
}

impl FromStr for StepMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" => Ok(StepMode::Fixed(None)),
            "adaptive" => Ok(StepMode::Adaptive),
            _ => match s.strip_prefix("fixed=").map(str::parse::<f64>) {
                Some(Ok(v)) if v > 0.0 && v.is_finite() => Ok(StepMode::Fixed(Some(v))),
                Some(_) => Err(format!("step size must be a positive number in {s:?}")),
                None => Err(format!("unknown step-size mode {s:?} (expected fixed, fixed=S or adaptive)")),
            },
        }
    }
}

crate::string_serde!(StepMode);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub mode: StepMode,
    pub reduction_exponent: f64,
    pub growth_exponent: f64,
    pub max_retries: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            mode: StepMode::Adaptive,
            reduction_exponent: 0.3,
            growth_exponent: 0.6,
            max_retries: 60,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.reduction_exponent > 0.0 && self.growth_exponent > 0.0) {
            return Err("step-size exponents must be positive".into());
        }
        if self.max_retries == 0 {
            return Err("step-size retries must be at least 1".into());
        }
        Ok(())
    }
}

/// Text forms: `fixed=W`, `adaptive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    Fixed(f64),
    Adaptive,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMode::Fixed(w) => write!(f, "fixed={w}"),
            WeightMode::Adaptive => write!(f, "adaptive"),
        }
    }
}

impl FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "adaptive" {
            return Ok(WeightMode::Adaptive);
        }
        match s.strip_prefix("fixed=").map(str::parse::<f64>) {
            Some(Ok(w)) if w > 0.0 && w.is_finite() => Ok(WeightMode::Fixed(w)),
            Some(_) => Err(format!("primal weight must be a positive number in {s:?}")),
            None => Err(format!("unknown primal-weight mode {s:?} (expected fixed=W or adaptive)")),
        }
    }
}

crate::string_serde!(WeightMode);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPolicy {
    pub mode: WeightMode,
    /// Weight `θ` of the new movement ratio in the log-space average.
    pub smoothing: f64,
    pub movement_floor: f64,
}

impl Default for WeightPolicy {
    fn default() -> Self {
        Self {
            mode: WeightMode::Adaptive,
            smoothing: 0.5,
            movement_floor: 1e-10,
        }
    }
}

impl WeightPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.smoothing) {
            return Err(format!("primal-weight smoothing must lie in [0, 1], got {}", self.smoothing));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("step size {step_size:e} fell below 1e-14 of its initial value")]
    StepSizeUnderflow { step_size: f64 },
    #[error("no acceptable step size after {0} trials")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Pdhg(#[from] PdhgError),
}

/// What one adaptive iteration did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Step size the accepted iterate was computed with.
    pub used_step_size: f64,
    pub rejected_trials: usize,
}

/// Largest step allowed by the movement of the last trial:
/// `‖Δz‖²_ω / (2|ΔyᵀKΔx|)`, or `+∞` when the interaction term vanishes.
///
/// The magnitude is used because with this update's sign convention it is a
/// negative `ΔyᵀKΔx` that signals an overlong step.
pub fn step_bound(dx_sq: f64, dy_sq: f64, interaction: f64, omega: f64) -> f64 {
    if interaction == 0.0 {
        return f64::INFINITY;
    }
    (omega * dx_sq + dy_sq / omega) / (2.0 * interaction.abs())
}

/// Next step size after a trial at `s` with bound `ŝ` at global iteration `t`.
pub fn next_step_size(s: f64, bound: f64, t: usize, policy: &StepPolicy) -> f64 {
    let t1 = (t + 1) as f64;
    let shrunk = (1.0 - t1.powf(-policy.reduction_exponent)) * bound;
    let grown = (1.0 + t1.powf(-policy.growth_exponent)) * s;
    shrunk.min(grown)
}

/// One PDHG iteration with the adaptive line search. Trials at the current
/// step size are retried with the reduced size until one satisfies
/// `s ≤ ŝ`; `step` then holds the size proposed for the next iteration.
pub fn adaptive_step(
    state: &mut IterateState,
    saddle: &SaddleForm,
    step: &mut StepState,
    policy: &StepPolicy,
    initial_step_size: f64,
) -> Result<StepOutcome, StepError> {
    let omega = step.primal_weight;
    for trial in 0..policy.max_retries {
        if step.step_size < 1e-14 * initial_step_size {
            return Err(StepError::StepSizeUnderflow {
                step_size: step.step_size,
            });
        }
        state.propose(saddle, step);
        let (dx_sq, dy_sq, interaction) = state.proposal_movement();
        let bound = step_bound(dx_sq, dy_sq, interaction, omega);
        let used = step.step_size;
        // Iterations are counted from 1 here; at t = 0 the reduction factor vanishes.
        let next = next_step_size(used, bound, state.total_count + 1, policy);
        if used <= bound {
            state.accept(saddle, used)?;
            step.step_size = next;
            return Ok(StepOutcome {
                used_step_size: used,
                rejected_trials: trial,
            });
        }
        if !next.is_finite() || next <= 0.0 {
            return Err(StepError::StepSizeUnderflow { step_size: next });
        }
        step.step_size = next;
    }
    Err(StepError::RetriesExhausted(policy.max_retries))
}

/// Log-space smoothing of `ω` toward the observed dual/primal movement ratio.
/// Leaves `ω` unchanged if either movement is below the floor.
pub fn update_primal_weight(omega: f64, dx_norm: f64, dy_norm: f64, policy: &WeightPolicy) -> f64 {
    if let WeightMode::Fixed(_) = policy.mode {
        return omega;
    }
    if dx_norm <= policy.movement_floor || dy_norm <= policy.movement_floor {
        return omega;
    }
    let theta = policy.smoothing;
    (theta * (dy_norm / dx_norm).ln() + (1.0 - theta) * omega.ln()).exp()
}

/// Initial `s` and `ω`. `norm_k` is only used for the automatic fixed step and
/// may be `None` otherwise.
pub fn initialize_step_state(
    saddle: &SaddleForm,
    norm_k: Option<f64>,
    step: &StepPolicy,
    weight: &WeightPolicy,
) -> StepState {
    let step_size = match step.mode {
        StepMode::Fixed(Some(s)) => s,
        StepMode::Fixed(None) => match norm_k {
            Some(nk) if nk > 0.0 => 0.9 / nk,
            _ => 1.0,
        },
        StepMode::Adaptive => {
            let max_abs = saddle.k.max_abs();
            if max_abs > 0.0 {
                1.0 / max_abs
            } else {
                1.0
            }
        }
    };
    let primal_weight = match weight.mode {
        WeightMode::Fixed(w) => w,
        WeightMode::Adaptive => initial_primal_weight(&saddle.c, &saddle.q),
    };
    StepState::new(step_size, primal_weight)
}

/// `‖c‖₂/‖q‖₂`, or 1 when either norm is negligible.
pub fn initial_primal_weight(c: &[f64], q: &[f64]) -> f64 {
    let (nc, nq) = (norm2(c), norm2(q));
    if nc > 1e-10 && nq > 1e-10 {
        nc / nq
    } else {
        1.0
    }
}

//! Normalized duality gap and restart policies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pdhg::IterateState;
use crate::problem::SaddleForm;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RestartError {
    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("expected positive inputs, got ‖K‖ = {norm_k}, α = {sharpness}")]
    NonPositiveInput { norm_k: f64, sharpness: f64 },
}

/// Normalized duality gap `ρ_r(z)` of the saddle problem at `z = (x, y)`.
///
/// This is `max{L(x, ŷ) − L(x̂, y) : ẑ ∈ Z, ‖ẑ − z‖₂ ≤ r} / r`. The objective
/// is linear in `ẑ − z` with gradient `d = (Kᵀy − c, q − Kx)`; the maximizer
/// over ball ∩ box is `δ(t) = clamp(t·d, lo − z, hi − z)` for the largest `t`
/// with `‖δ(t)‖ ≤ r`, found by bisection.
pub fn normalized_duality_gap(saddle: &SaddleForm, x: &[f64], y: &[f64], r: f64) -> Result<f64, RestartError> {
    let kx = saddle.k.matvec(x).expect("x has K's column count");
    let kty = saddle.k.matvec_transpose(y).expect("y has K's row count");
    normalized_gap_with_products(saddle, x, y, &kx, &kty, r)
}

/// As [`normalized_duality_gap`], reusing precomputed `Kx` and `Kᵀy`.
pub fn normalized_gap_with_products(
    saddle: &SaddleForm,
    x: &[f64],
    y: &[f64],
    kx: &[f64],
    kty: &[f64],
    r: f64,
) -> Result<f64, RestartError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(RestartError::InvalidRadius(r));
    }
    let n = x.len();
    let m = y.len();
    let mut d = Vec::with_capacity(n + m);
    let mut lo = Vec::with_capacity(n + m);
    let mut hi = Vec::with_capacity(n + m);
    for j in 0..n {
        d.push(kty[j] - saddle.c[j]);
        lo.push(saddle.lower[j] - x[j]);
        hi.push(saddle.upper[j] - x[j]);
    }
    for i in 0..m {
        d.push(saddle.q[i] - kx[i]);
        lo.push(if i < saddle.m1 { -y[i] } else { f64::NEG_INFINITY });
        hi.push(f64::INFINITY);
    }
    Ok(ball_box_max(&d, &lo, &hi, r) / r)
}

/// `max{dᵀδ : ‖δ‖₂ ≤ r, lo ≤ δ ≤ hi}` for a box containing the origin.
fn ball_box_max(d: &[f64], lo: &[f64], hi: &[f64], r: f64) -> f64 {
    let clamp_at = |t: f64| -> (f64, f64) {
        let mut norm_sq = 0.0;
        let mut value = 0.0;
        for ((&di, &l), &h) in d.iter().zip(lo).zip(hi) {
            let v = (t * di).clamp(l.min(0.0), h.max(0.0));
            norm_sq += v * v;
            value += di * v;
        }
        (norm_sq.sqrt(), value)
    };
    let d_norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if d_norm == 0.0 {
        return 0.0;
    }
    let t0 = r / d_norm;
    let (norm0, value0) = clamp_at(t0);
    if norm0 >= r * (1.0 - 1e-12) {
        // No clamp is active on the ball solution.
        return value0;
    }
    // The clamped path saturates at the box corner selected by sign(d).
    let (norm_inf, value_inf) = clamp_at(f64::INFINITY);
    if norm_inf.is_finite() && norm_inf <= r {
        return value_inf;
    }
    let mut t_lo = t0;
    let mut t_hi = 2.0 * t0;
    while clamp_at(t_hi).0 < r {
        t_lo = t_hi;
        t_hi *= 2.0;
    }
    let mut best = clamp_at(t_lo).1;
    for _ in 0..100 {
        let mid = 0.5 * (t_lo + t_hi);
        let (norm, value) = clamp_at(mid);
        if norm <= r {
            t_lo = mid;
            best = value;
            if r - norm <= 1e-10 * r {
                break;
            }
        } else {
            t_hi = mid;
        }
        if t_hi - t_lo <= 1e-10 * t_hi {
            break;
        }
    }
    best
}

/// Restart period `⌈4e·‖K‖₂/α⌉` for a problem with sharpness `α`.
pub fn fixed_period_from_sharpness(norm_k: f64, sharpness: f64) -> Result<usize, RestartError> {
    if !(norm_k > 0.0 && sharpness > 0.0) {
        return Err(RestartError::NonPositiveInput { norm_k, sharpness });
    }
    Ok((4.0 * std::f64::consts::E * norm_k / sharpness).ceil() as usize)
}

/// When to restart. Text forms: `none`, `fixed=K`, `sharpness=A`, `adaptive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RestartScheme {
    None,
    Fixed(usize),
    /// Fixed period derived from a sharpness constant and `‖K‖₂`.
    Sharpness(f64),
    Adaptive,
}

impl fmt::Display for RestartScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestartScheme::None => write!(f, "none"),
            RestartScheme::Fixed(k) => write!(f, "fixed={k}"),
            RestartScheme::Sharpness(a) => write!(f, "sharpness={a}"),
            RestartScheme::Adaptive => write!(f, "adaptive"),
        }
    }
}

impl FromStr for RestartScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => return Ok(RestartScheme::None),
            "adaptive" => return Ok(RestartScheme::Adaptive),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("fixed=") {
            return match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(RestartScheme::Fixed(k)),
                _ => Err(format!("restart period must be a positive integer, got {k:?}")),
            };
        }
        if let Some(a) = s.strip_prefix("sharpness=") {
            return match a.parse::<f64>() {
                Ok(a) if a > 0.0 && a.is_finite() => Ok(RestartScheme::Sharpness(a)),
                _ => Err(format!("sharpness must be a positive number, got {a:?}")),
            };
        }
        Err(format!("unknown restart scheme {s:?} (expected none, fixed=K, sharpness=A or adaptive)"))
    }
}

crate::string_serde!(RestartScheme);

/// Which point a restart jumps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CandidateRule {
    #[default]
    Average,
    /// Whichever of the epoch average and the current iterate has the smaller
    /// normalized gap at its own distance from the epoch start.
    BestOfAverageAndCurrent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartConfig {
    pub scheme: RestartScheme,
    /// Required shrinkage `β` of the normalized gap.
    pub sufficient_decay: f64,
    /// Forced restart once the epoch is this fraction of all iterations.
    pub artificial_cap_fraction: f64,
    pub artificial_cap_minimum: usize,
    pub candidate_rule: CandidateRule,
    /// Inner iterations between gap evaluations.
    pub evaluation_interval: usize,
}

impl Default for RestartConfig {
    fn default() -> Self {
        Self {
            scheme: RestartScheme::Adaptive,
            sufficient_decay: 0.5,
            artificial_cap_fraction: 0.36,
            artificial_cap_minimum: 10,
            candidate_rule: CandidateRule::Average,
            evaluation_interval: 40,
        }
    }
}

impl RestartConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.sufficient_decay > 0.0 && self.sufficient_decay < 1.0) {
            return Err(format!("sufficient decay must lie in (0, 1), got {}", self.sufficient_decay));
        }
        if !(self.artificial_cap_fraction > 0.0) {
            return Err("artificial cap fraction must be positive".into());
        }
        if self.evaluation_interval == 0 {
            return Err("gap evaluation interval must be at least 1".into());
        }
        Ok(())
    }

    /// Epoch length beyond which an adaptive restart is forced.
    pub fn artificial_cap(&self, total_count: usize) -> usize {
        let scaled = (self.artificial_cap_fraction * total_count as f64).ceil() as usize;
        scaled.max(self.artificial_cap_minimum)
    }
}

/// Epoch start `z^{n,0}`, the previous start, and the reference gap.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSnapshot {
    pub start_x: Vec<f64>,
    pub start_y: Vec<f64>,
    pub previous_start: Option<(Vec<f64>, Vec<f64>)>,
    pub gap_at_start: f64,
    pub radius: f64,
}

impl EpochSnapshot {
    /// Snapshot at `z`, with the reference gap measured at radius
    /// `‖z − previous‖₂`, or `‖z‖₂ + 1` without a usable previous start.
    pub fn new(
        saddle: &SaddleForm,
        x: &[f64],
        y: &[f64],
        kx: &[f64],
        kty: &[f64],
        previous_start: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Self {
        let moved = previous_start
            .as_ref()
            .map(|(px, py)| point_distance((x, y), (px, py)))
            .unwrap_or(0.0);
        let radius = if moved > 0.0 {
            moved
        } else {
            point_distance((x, y), (&vec![0.0; x.len()], &vec![0.0; y.len()])) + 1.0
        };
        let gap_at_start = normalized_gap_with_products(saddle, x, y, kx, kty, radius).expect("radius is positive");
        Self {
            start_x: x.to_vec(),
            start_y: y.to_vec(),
            previous_start,
            gap_at_start,
            radius,
        }
    }
}

/// `‖z1 − z2‖₂` over the stacked point.
pub fn point_distance(z1: (&[f64], &[f64]), z2: (&[f64], &[f64])) -> f64 {
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
    (sq(z1.0, z2.0) + sq(z1.1, z2.1)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    Average,
    Current,
}

/// Gap of the restart candidate and the epoch reference gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPair {
    pub kind: CandidateKind,
    pub candidate: f64,
    /// `‖candidate − z^{n,0}‖₂`; the adaptive test is skipped when zero.
    pub candidate_radius: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestartDecision {
    Continue,
    RestartTo(CandidateKind),
}

/// Restart test of the configured scheme. `gaps` is only consulted by the
/// adaptive scheme and may be `None` between gap evaluations.
pub fn should_restart(
    state: &IterateState,
    cfg: &RestartConfig,
    fixed_period: Option<usize>,
    gaps: Option<GapPair>,
) -> RestartDecision {
    match cfg.scheme {
        RestartScheme::None => RestartDecision::Continue,
        RestartScheme::Fixed(_) | RestartScheme::Sharpness(_) => {
            let period = match (cfg.scheme, fixed_period) {
                (RestartScheme::Fixed(k), _) => k,
                (_, Some(k)) => k,
                _ => return RestartDecision::Continue,
            };
            if state.inner_count >= period {
                RestartDecision::RestartTo(CandidateKind::Average)
            } else {
                RestartDecision::Continue
            }
        }
        RestartScheme::Adaptive => {
            let capped = state.inner_count >= cfg.artificial_cap(state.total_count);
            match gaps {
                Some(g) if g.candidate_radius > 0.0 && g.candidate <= cfg.sufficient_decay * g.reference => {
                    RestartDecision::RestartTo(g.kind)
                }
                Some(g) if capped => RestartDecision::RestartTo(g.kind),
                None if capped => RestartDecision::RestartTo(CandidateKind::Average),
                _ => RestartDecision::Continue,
            }
        }
    }
}

/// Jumps to the candidate and opens a new epoch.
pub fn apply_restart(state: &mut IterateState, saddle: &SaddleForm, x: Vec<f64>, y: Vec<f64>) {
    state.restart_to(saddle, x, y);
}

/// Normalized gap of the candidate at its own distance from the epoch start,
/// or zero radius when it has not moved.
pub(crate) fn candidate_gap(
    saddle: &SaddleForm,
    snapshot: &EpochSnapshot,
    x: &[f64],
    y: &[f64],
    products: Option<(&[f64], &[f64])>,
) -> (f64, f64, u64) {
    let radius = point_distance((x, y), (&snapshot.start_x, &snapshot.start_y));
    if radius == 0.0 {
        return (0.0, 0.0, 0);
    }
    let (gap, matvecs) = match products {
        Some((kx, kty)) => (normalized_gap_with_products(saddle, x, y, kx, kty, radius), 0),
        None => {
            let kx = saddle.k.matvec(x).expect("dimensions checked");
            let kty = saddle.k.matvec_transpose(y).expect("dimensions checked");
            (normalized_gap_with_products(saddle, x, y, &kx, &kty, radius), 2)
        }
    };
    (gap.expect("radius is positive"), radius, matvecs)
}

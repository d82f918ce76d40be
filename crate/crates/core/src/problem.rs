//! The LP data model and its saddle-point reformulation.
//!
//! Problems are stored as
//!
//! ```text
//! min  cᵀx + offset
//! s.t. G x ≥ h
//!      A x = b
//!      l ≤ x ≤ u
//! ```
//!
//! and iterated on as `min_{x∈X} max_{y∈Y} cᵀx − yᵀKx + qᵀy` with `K = [G; A]`,
//! `q = [h; b]`, `X = {l ≤ x ≤ u}` and `Y = {y : y_i ≥ 0 for the G rows}`.

use std::ops::Deref;

use crate::error::DimensionError;
use crate::linalg::{dot, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSense {
    #[default]
    Minimize,
    /// The stored objective and offset are the negation of the user's
    /// maximization objective.
    Maximize,
}

impl ObjectiveSense {
    /// Factor that maps a stored (minimization) objective value to the
    /// user-facing one.
    pub fn sign(self) -> f64 {
        match self {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub name: String,
    pub sense: ObjectiveSense,
    pub objective: Vec<f64>,
    /// Constant added to reported objective values only.
    pub objective_offset: f64,
    pub ineq_matrix: SparseMatrix,
    pub ineq_rhs: Vec<f64>,
    pub eq_matrix: SparseMatrix,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Either empty or one name per variable. Same for the row name lists.
    pub var_names: Vec<String>,
    pub ineq_names: Vec<String>,
    pub eq_names: Vec<String>,
}

impl LpProblem {
    /// A problem with the given objective and bounds and no constraint rows.
    pub fn new(objective: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            name: String::new(),
            sense: ObjectiveSense::Minimize,
            objective,
            objective_offset: 0.0,
            ineq_matrix: SparseMatrix::zeros(0, n),
            ineq_rhs: Vec::new(),
            eq_matrix: SparseMatrix::zeros(0, n),
            eq_rhs: Vec::new(),
            lower,
            upper,
            var_names: Vec::new(),
            ineq_names: Vec::new(),
            eq_names: Vec::new(),
        }
    }

    pub fn with_inequalities(mut self, matrix: SparseMatrix, rhs: Vec<f64>) -> Self {
        self.ineq_matrix = matrix;
        self.ineq_rhs = rhs;
        self
    }

    pub fn with_equalities(mut self, matrix: SparseMatrix, rhs: Vec<f64>) -> Self {
        self.eq_matrix = matrix;
        self.eq_rhs = rhs;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq_rhs.len()
    }

    pub fn num_eq(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn constraint_nnz(&self) -> usize {
        self.ineq_matrix.nnz() + self.eq_matrix.nnz()
    }

    /// Objective value as the user posed it: offset included, sign restored.
    pub fn reported_objective(&self, stored_value: f64) -> f64 {
        self.sense.sign() * (stored_value + self.objective_offset)
    }

    pub fn var_name(&self, j: usize) -> String {
        self.var_names.get(j).cloned().unwrap_or_else(|| format!("C{j}"))
    }
}

/// One reason a problem failed validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationIssue {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inconsistent bounds on variable {index}: lower {lower} > upper {upper}")]
    InconsistentBounds { index: usize, lower: f64, upper: f64 },
    #[error("non-finite data: {0}")]
    NonFiniteData(String),
}

/// Every invariant violation found in a problem.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid problem: {}", .issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub issues: Vec<ValidationIssue>,
}

/// An [`LpProblem`] that passed [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProblem(LpProblem);

impl ValidatedProblem {
    pub fn into_inner(self) -> LpProblem {
        self.0
    }
}

impl Deref for ValidatedProblem {
    type Target = LpProblem;

    fn deref(&self) -> &LpProblem {
        &self.0
    }
}

pub fn validate(problem: LpProblem) -> Result<ValidatedProblem, ValidationError> {
    let mut issues = Vec::new();
    let n = problem.num_vars();
    let mut dim = |what: &str, expected: usize, found: usize| {
        if expected != found {
            issues.push(ValidationIssue::DimensionMismatch(format!(
                "{what}: expected {expected}, found {found}"
            )));
        }
    };
    dim("inequality matrix columns", n, problem.ineq_matrix.cols());
    dim("inequality rhs length", problem.ineq_matrix.rows(), problem.ineq_rhs.len());
    dim("equality matrix columns", n, problem.eq_matrix.cols());
    dim("equality rhs length", problem.eq_matrix.rows(), problem.eq_rhs.len());
    dim("lower bound length", n, problem.lower.len());
    dim("upper bound length", n, problem.upper.len());
    for (what, names, expected) in [
        ("variable names", &problem.var_names, n),
        ("inequality row names", &problem.ineq_names, problem.ineq_rhs.len()),
        ("equality row names", &problem.eq_names, problem.eq_rhs.len()),
    ] {
        if !names.is_empty() {
            dim(what, expected, names.len());
        }
    }

    let mut non_finite = |what: &str, values: &[f64]| {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            issues.push(ValidationIssue::NonFiniteData(format!("{what}[{i}] = {}", values[i])));
        }
    };
    non_finite("objective", &problem.objective);
    non_finite("inequality rhs", &problem.ineq_rhs);
    non_finite("equality rhs", &problem.eq_rhs);
    non_finite("objective offset", &[problem.objective_offset]);
    if !problem.ineq_matrix.is_well_formed() {
        issues.push(ValidationIssue::NonFiniteData("inequality matrix entries".into()));
    }
    if !problem.eq_matrix.is_well_formed() {
        issues.push(ValidationIssue::NonFiniteData("equality matrix entries".into()));
    }

    for (i, (&l, &u)) in problem.lower.iter().zip(&problem.upper).enumerate() {
        if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
            issues.push(ValidationIssue::NonFiniteData(format!(
                "bounds of variable {i} = [{l}, {u}]"
            )));
        } else if l > u {
            issues.push(ValidationIssue::InconsistentBounds {
                index: i,
                lower: l,
                upper: u,
            });
        }
    }

    if issues.is_empty() {
        Ok(ValidatedProblem(problem))
    } else {
        Err(ValidationError { issues })
    }
}

/// The saddle-point form `cᵀx − yᵀKx + qᵀy` over `X × Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleForm {
    /// `[G; A]`, inequality rows first.
    pub k: SparseMatrix,
    /// `[h; b]`.
    pub q: Vec<f64>,
    /// Number of inequality rows; duals of these rows are sign-constrained.
    pub m1: usize,
    pub c: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective_offset: f64,
}

impl SaddleForm {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.q.len()
    }

    pub fn ineq_block(&self) -> (SparseMatrix, &[f64]) {
        (self.k.row_block(0, self.m1), &self.q[..self.m1])
    }

    pub fn eq_block(&self) -> (SparseMatrix, &[f64]) {
        (self.k.row_block(self.m1, self.k.rows()), &self.q[self.m1..])
    }
}

pub fn to_saddle(problem: &ValidatedProblem) -> SaddleForm {
    let k = problem
        .ineq_matrix
        .vstack(&problem.eq_matrix)
        .expect("validated blocks share a column count");
    let mut q = problem.ineq_rhs.clone();
    q.extend_from_slice(&problem.eq_rhs);
    SaddleForm {
        k,
        q,
        m1: problem.num_ineq(),
        c: problem.objective.clone(),
        lower: problem.lower.clone(),
        upper: problem.upper.clone(),
        objective_offset: problem.objective_offset,
    }
}

/// `cᵀx − yᵀKx + qᵀy`. The objective offset is not included.
pub fn lagrangian(saddle: &SaddleForm, x: &[f64], y: &[f64]) -> Result<f64, DimensionError> {
    let kx = saddle.k.matvec(x)?;
    DimensionError::check("lagrangian dual vector", saddle.num_rows(), y.len())?;
    Ok(dot(&saddle.c, x) - dot(y, &kx) + dot(&saddle.q, y))
}

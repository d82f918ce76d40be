//! Restarted primal-dual hybrid gradient (PDHG) for linear programs.
//!
//! The solver works on the general form
//!
//! ```text
//! min cᵀx  s.t.  Gx ≥ h,  Ax = b,  l ≤ x ≤ u
//! ```
//!
//! through its saddle-point reformulation `min_x max_y cᵀx − yᵀKx + qᵀy`,
//! with diagonal preconditioning, adaptive restarts, adaptive step sizes,
//! primal-weight balancing and infeasibility detection layered on top.
//!
//! ```
//! use pdhg_lp::{io::generate_bilinear_toy, solve, SolverConfig, SolveStatus};
//!
//! let report = solve(generate_bilinear_toy(), &SolverConfig::default()).unwrap();
//! assert_eq!(report.status, SolveStatus::Optimal);
//! assert!((report.x[0] - 3.0).abs() < 1e-6);
//! ```

// `!(x > 0.0)` is deliberate: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over CSR pointers read better than zipped iterators.
#![allow(clippy::needless_range_loop)]

/// Serializes a type through its `Display` impl and deserializes through
/// `FromStr`, so config values read the same on the command line and in JSON.
#[macro_export]
#[doc(hidden)]
macro_rules! string_serde {
    ($ty:ty) => {
        impl serde::Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> serde::Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = <String as serde::Deserialize>::deserialize(deserializer)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

pub mod error;
pub mod io;
pub mod linalg;
pub mod pdhg;
pub mod problem;
pub mod restart;
pub mod step;
pub mod solver;
pub mod termination;

pub use problem::{validate, LpProblem, ObjectiveSense, SaddleForm, ValidatedProblem};
pub use solver::{solve, solve_vanilla, SolveReport, SolveStatus, Solver, SolverConfig};

//! Convex quadratic semidefinite programming.
//!
//! Solves problems of the form
//!
//! ```text
//!   minimize    1/2 z' B z + h' z
//!   subject to  A_j(z) + C_j <= 0   (negative semidefinite, per block j)
//! ```
//!
//! with a feasible-start primal-dual path-following interior-point method
//! using Nesterov-Todd scaling and a Mehrotra predictor-corrector. A Phase-I
//! mode finds a strictly feasible starting point or certifies that none
//! exists.

mod ipm;
mod map;
mod phase1;
mod problem;

pub use ipm::solve_qsdp;
pub use map::{adjoint_apply, eval_map, AffineSymMap};
pub use phase1::phase1_feasibility;
pub use problem::{IpmConfig, QsdpProblem, QsdpSolution, QsdpStatus};

/// Errors for malformed inputs; solver outcomes are reported through
/// [`QsdpStatus`] instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("iteration limit reached in {0}")]
    IterLimit(&'static str),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Kernel(#[from] matlin::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Local optimization over matrix inequalities with convex-concave structure.
//!
//! A constraint here is a difference of two psd-convex matrix maps,
//! `G(x) − H(x) ⪯ 0`, where each side is assembled from three kinds of
//! building blocks: affine maps, squared affine maps `M(x)ᵀM(x)`, and
//! inverses of symmetric matrix variables. Bilinear terms such as
//! `X(x)ᵀY(x) + Y(x)ᵀX(x)` do not fit either side directly but always
//! split into a difference of squares ([`split_bilinear`]), which is how
//! problems with products of decision variables enter this form.
//!
//! The method itself is an inner-approximation loop: at the current
//! iterate the concave side is replaced by its tangent ([`linearize_concave`]),
//! every remaining square is folded into a larger linear matrix inequality
//! by a Schur-complement lift ([`lift_subproblem`]), and the resulting
//! convex quadratic SDP is handed to the `sdp` solver. Because the tangent
//! overestimates nothing (`H(x) ⪰ Hₖ(x)` everywhere), each subproblem's
//! feasible set sits inside the original one, so every iterate stays
//! feasible and the objective never increases. [`ccd_solve`] runs the loop
//! with a proximal regularizer and reports per-iteration diagnostics,
//! including the stationarity residual of the original problem
//! ([`kkt_residual`]).

mod kkt;
mod lift;
mod linearize;
mod problem;
mod solve;
mod term;

pub use kkt::{kkt_residual, Multipliers};
pub use lift::lift_subproblem;
pub use linearize::linearize_concave;
pub use problem::{CcdConstraint, CcdProblem};
pub use solve::{ccd_solve, CcdConfig, CcdRecord, CcdStatus, CcdTrace, QkMode};
pub use term::{
    split_bilinear, sym_basis, sym_index, sym_len, AffineMat, MappingTerm, SplitForm,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid problem: {0}")]
    Invalid(String),

    /// A matrix-inverse term was evaluated or linearized outside its
    /// domain (the packed symmetric variable is not positive definite).
    #[error("domain violation: {0}")]
    Domain(String),

    /// The starting point is not strictly feasible: some constraint block
    /// has a largest eigenvalue above `-eps_strict`.
    #[error("infeasible start: worst block eigenvalue {margin:.6e} is above -{eps:.1e}")]
    InfeasibleStart { margin: f64, eps: f64 },

    #[error(transparent)]
    Kernel(#[from] matlin::Error),

    #[error(transparent)]
    Subproblem(#[from] sdp::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

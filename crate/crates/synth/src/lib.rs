//! Static output-feedback controller synthesis over bilinear matrix
//! inequalities.
//!
//! Each frontend states one design problem — sparse stabilization,
//! spectral-abscissa or pseudo-spectral-abscissa optimization, H₂, H∞, or
//! mixed H₂/H∞ — as a difference-of-convex matrix program, finds a strictly
//! feasible starting point with a staged initialization, and hands the
//! model to the `ccd` outer loop. The returned gain is never trusted on the
//! solver's word: every report re-derives its closed-loop metrics with
//! `matlin` oracles (eigenvalues, Lyapunov equations, a Hamiltonian
//! bisection) and re-evaluates the original matrix inequalities at the
//! returned certificates.

mod h2;
mod hinf;
mod mixed;
mod pack;
mod phase1;
mod plant;
mod report;
mod sa;
mod sparse;
mod validate;

pub use h2::synth_h2;
pub use hinf::synth_hinf;
pub use mixed::synth_mixed;
pub use plant::Plant;
pub use report::{Controller, Metrics, SynthConfig, SynthReport, SynthStatus};
pub use sa::{synth_pseudo_spectral, synth_spectral_abscissa};
pub use sparse::synth_sparse_sof;
pub use validate::{validate_h2, validate_hinf, validate_stability};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// Every initialization stage was tried and none produced a strictly
    /// feasible starting point for the outer loop.
    #[error("no starting point found: {0}")]
    NoStart(String),

    /// The initialization certified that no strictly feasible point exists
    /// (its feasibility measure converged to a nonpositive value).
    #[error("problem declared infeasible: {0}")]
    Infeasible(String),

    /// A validator was asked for a norm of an unstable closed loop.
    #[error("closed loop is not Hurwitz: spectral abscissa {0:.6e}")]
    Unstable(f64),

    #[error(transparent)]
    Ccd(#[from] ccd::Error),

    #[error(transparent)]
    Sdp(#[from] sdp::Error),

    #[error(transparent)]
    Kernel(#[from] matlin::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

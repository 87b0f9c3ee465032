//! Dense linear algebra kernels for small control-oriented problems.
//!
//! Everything here is plain safe Rust over row-major `Vec<f64>` storage.
//! The solvers upstream need a handful of decompositions on matrices of a
//! few dozen rows at most, so the classic dense algorithms (Householder
//! tridiagonalization, Francis QR, Bartels-Stewart, one-sided Jacobi SVD)
//! are implemented directly rather than pulled in from a BLAS binding.
//!
//! All operations are pure functions: no globals, no interior mutability,
//! safe to call concurrently.

mod chol;
mod eig;
mod lu;
mod lyap;
mod mat;
mod pinv;
mod schur;
mod sym;

pub use chol::cholesky;
pub use eig::sym_eig;
pub use lu::{lu_factor, lu_solve, solve, LuFactors};
pub use lyap::lyapunov_solve;
pub use mat::{kron, mat, vec_of, Mat};
pub use pinv::{pseudo_inverse, svd};
pub use schur::{eigenvalues, real_schur, spectral_abscissa};
pub use sym::SymMat;

use thiserror::Error;

/// Errors shared by every kernel in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },
    #[error("iteration did not converge: {0}")]
    NumericalFailure(String),
    #[error("system matrix is not Hurwitz (spectral abscissa {0:.3e} >= 0)")]
    Unstable(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

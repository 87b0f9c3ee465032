use matlin::SymMat;

use crate::{AffineSymMap, Error, Result};

/// min 1/2 z' B z + h' z  s.t.  blocks[j].eval(z) <= 0 for every j.
#[derive(Debug, Clone)]
pub struct QsdpProblem {
    pub nvars: usize,
    /// Quadratic objective term, must be positive semidefinite.
    pub b_quad: SymMat,
    pub h: Vec<f64>,
    pub blocks: Vec<AffineSymMap>,
}

impl QsdpProblem {
    /// Validates dimensions and objective convexity (B + 1e-12 I must admit
    /// a Cholesky factor).
    pub fn validate(&self) -> Result<()> {
        if self.nvars == 0 {
            return Err(Error::Dimension("problem has no variables".into()));
        }
        if self.b_quad.n() != self.nvars || self.h.len() != self.nvars {
            return Err(Error::Dimension(format!(
                "objective dimension mismatch: B is {}x{}, h has {}, nvars is {}",
                self.b_quad.n(),
                self.b_quad.n(),
                self.h.len(),
                self.nvars
            )));
        }
        let mut shifted = self.b_quad.to_mat();
        let bump = 1e-12 * (1.0 + shifted.norm_max());
        for i in 0..self.nvars {
            shifted[(i, i)] += bump;
        }
        matlin::cholesky(&shifted.symmetrize()).map_err(|_| {
            Error::NumericalFailure("quadratic objective term is not positive semidefinite".into())
        })?;
        for (j, b) in self.blocks.iter().enumerate() {
            if b.nvars() != self.nvars {
                return Err(Error::Dimension(format!(
                    "block {j} has {} variables, problem has {}",
                    b.nvars(),
                    self.nvars
                )));
            }
        }
        Ok(())
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        let bz = self.b_quad.matvec(z);
        0.5 * z.iter().zip(&bz).map(|(a, b)| a * b).sum::<f64>()
            + self.h.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsdpStatus {
    Optimal,
    PrimalInfeasible,
    NumericalFailure,
    IterLimit,
}

#[derive(Debug, Clone)]
pub struct QsdpSolution {
    pub z: Vec<f64>,
    /// Dual multiplier per block.
    pub v: Vec<SymMat>,
    /// Slack per block: S = -eval(z).
    pub s: Vec<SymMat>,
    pub status: QsdpStatus,
    /// max of relative duality gap and relative stationarity residual at exit.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct IpmConfig {
    /// Relative duality-gap tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Fraction-to-boundary step damping.
    pub ftb: f64,
    /// Strictly feasible starting point; when absent a Phase-I problem is
    /// solved internally to find one.
    pub start: Option<Vec<f64>>,
}

impl Default for IpmConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 100, ftb: 0.98, start: None }
    }
}

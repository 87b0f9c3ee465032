use matlin::SymMat;

use crate::{Error, Result};

/// Affine map z -> A0 + sum_i z_i A_i into symmetric matrices of a fixed
/// dimension. One constraint block `eval(z) <= 0`.
#[derive(Debug, Clone)]
pub struct AffineSymMap {
    a0: SymMat,
    ai: Vec<SymMat>,
}

impl AffineSymMap {
    /// Builds a map from its constant term and per-variable coefficients.
    /// All matrices must share one dimension.
    pub fn new(a0: SymMat, ai: Vec<SymMat>) -> Result<Self> {
        let dim = a0.n();
        for (i, a) in ai.iter().enumerate() {
            if a.n() != dim {
                return Err(Error::Dimension(format!(
                    "coefficient {i} is {}x{} but the constant term is {dim}x{dim}",
                    a.n(),
                    a.n()
                )));
            }
        }
        Ok(Self { a0, ai })
    }

    /// Map with a zero constant term.
    pub fn homogeneous(dim: usize, ai: Vec<SymMat>) -> Result<Self> {
        Self::new(SymMat::zeros(dim), ai)
    }

    pub fn nvars(&self) -> usize {
        self.ai.len()
    }

    pub fn dim(&self) -> usize {
        self.a0.n()
    }

    pub fn constant(&self) -> &SymMat {
        &self.a0
    }

    pub fn coefficient(&self, i: usize) -> &SymMat {
        &self.ai[i]
    }

    /// A0 + sum_i z_i A_i.
    pub fn eval(&self, z: &[f64]) -> Result<SymMat> {
        if z.len() != self.ai.len() {
            return Err(Error::Dimension(format!(
                "map has {} variables, point has {}",
                self.ai.len(),
                z.len()
            )));
        }
        let mut out = self.a0.clone();
        for (zi, a) in z.iter().zip(&self.ai) {
            if *zi != 0.0 {
                out.axpy(*zi, a);
            }
        }
        Ok(out)
    }

    /// Homogeneous part only: sum_i z_i A_i, without the constant term.
    pub fn linear(&self, z: &[f64]) -> Result<SymMat> {
        if z.len() != self.ai.len() {
            return Err(Error::Dimension(format!(
                "map has {} variables, direction has {}",
                self.ai.len(),
                z.len()
            )));
        }
        let mut out = SymMat::zeros(self.dim());
        for (zi, a) in z.iter().zip(&self.ai) {
            if *zi != 0.0 {
                out.axpy(*zi, a);
            }
        }
        Ok(out)
    }

    /// Adjoint: component i is trace(A_i' Z) = <A_i, Z>.
    pub fn adjoint(&self, z_mat: &SymMat) -> Result<Vec<f64>> {
        if z_mat.n() != self.dim() {
            return Err(Error::Dimension(format!(
                "adjoint argument is {}x{}, block is {}x{}",
                z_mat.n(),
                z_mat.n(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self.ai.iter().map(|a| a.dot(z_mat)).collect())
    }

    /// Extends the map with extra trailing variables that do not enter this
    /// block (zero coefficients), so maps over different variable slices can
    /// be joined into one problem.
    pub fn padded(&self, nvars: usize) -> Self {
        let mut ai = self.ai.clone();
        while ai.len() < nvars {
            ai.push(SymMat::zeros(self.dim()));
        }
        Self { a0: self.a0.clone(), ai }
    }
}

/// Free-function form of [`AffineSymMap::eval`].
pub fn eval_map(m: &AffineSymMap, z: &[f64]) -> Result<SymMat> {
    m.eval(z)
}

/// Free-function form of [`AffineSymMap::adjoint`].
pub fn adjoint_apply(m: &AffineSymMap, z_mat: &SymMat) -> Result<Vec<f64>> {
    m.adjoint(z_mat)
}

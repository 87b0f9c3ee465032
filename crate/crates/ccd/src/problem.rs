use matlin::{sym_eig, SymMat};
use sdp::AffineSymMap;

use crate::term::MappingTerm;
use crate::{Error, Result};

/// One matrix inequality G(x) − H(x) ⪯ 0.
///
/// `g` collects the psd-convex side, `h` the psd-concave part that enters
/// with a minus sign. Affine contributions always belong in `g` (an affine
/// term is both convex and concave; folding it into `g` keeps the concave
/// side purely nonlinear, which is what the linearization step expects).
#[derive(Debug, Clone)]
pub struct CcdConstraint {
    pub g: Vec<MappingTerm>,
    pub h: Vec<MappingTerm>,
    pub dim: usize,
}

impl CcdConstraint {
    /// G(x) − H(x) as a full symmetric block.
    pub fn eval(&self, x: &[f64]) -> Result<SymMat> {
        let mut out = SymMat::zeros(self.dim);
        for t in &self.g {
            out.add_assign(&t.eval(x, self.dim)?);
        }
        for t in &self.h {
            out.axpy(-1.0, &t.eval(x, self.dim)?);
        }
        Ok(out)
    }

    fn validate(&self, nvars: usize) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Invalid("constraint block of size zero".into()));
        }
        for t in &self.g {
            t.validate(self.dim, nvars)?;
            if matches!(t, MappingTerm::InverseOf { .. }) {
                return Err(Error::Invalid(
                    "inverse terms on the convex side are not supported; \
                     lift them as a separate constraint or move the model \
                     to the concave side"
                        .into(),
                ));
            }
        }
        for t in &self.h {
            t.validate(self.dim, nvars)?;
            if matches!(t, MappingTerm::Affine(_)) {
                return Err(Error::Invalid(
                    "affine terms belong on the convex side; fold them into g \
                     with a sign flip"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}

/// Minimize a convex quadratic over the constraints plus a polyhedral-like
/// base set given by plain LMIs.
///
/// Objective: f(x) = ½ xᵀB_obj x + h_objᵀx with B_obj ⪰ 0. The `omega`
/// blocks are affine maps W(x) constrained W(x) ⪯ 0; they carry variable
/// bounds, normalizations, and any other constraint with no concave part
/// that should bypass the lifting machinery.
#[derive(Debug, Clone)]
pub struct CcdProblem {
    pub nvars: usize,
    pub b_obj: SymMat,
    pub h_obj: Vec<f64>,
    pub constraints: Vec<CcdConstraint>,
    pub omega: Vec<AffineSymMap>,
}

impl CcdProblem {
    pub fn validate(&self) -> Result<()> {
        if self.nvars == 0 {
            return Err(Error::Invalid("problem has no variables".into()));
        }
        if self.b_obj.n() != self.nvars || self.h_obj.len() != self.nvars {
            return Err(Error::Dimension(format!(
                "objective is sized {} / {}, problem has {} variables",
                self.b_obj.n(),
                self.h_obj.len(),
                self.nvars
            )));
        }
        for c in &self.constraints {
            c.validate(self.nvars)?;
        }
        for (i, w) in self.omega.iter().enumerate() {
            if w.nvars() != self.nvars {
                return Err(Error::Dimension(format!(
                    "base-set block {i} has {} variables, problem has {}",
                    w.nvars(),
                    self.nvars
                )));
            }
        }
        // Convexity of the objective, with a little eigenvalue slack so
        // that round-off in an assembled B_obj does not reject a model.
        let (eigs, _) = sym_eig(&self.b_obj)?;
        let scale = 1.0 + self.b_obj.norm_max();
        if eigs.first().copied().unwrap_or(0.0) < -1e-9 * scale {
            return Err(Error::Invalid(format!(
                "objective quadratic has negative eigenvalue {:.3e}",
                eigs[0]
            )));
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let bx = self.b_obj.matvec(x);
        0.5 * x.iter().zip(&bx).map(|(a, b)| a * b).sum::<f64>()
            + self.h_obj.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Strong-convexity constant of the objective: the smallest eigenvalue
    /// of B_obj, clamped at zero.
    pub fn rho_f(&self) -> Result<f64> {
        let (eigs, _) = sym_eig(&self.b_obj)?;
        Ok(eigs.first().copied().unwrap_or(0.0).max(0.0))
    }

    /// Largest eigenvalue of each constraint block at x.
    pub fn constraint_eigs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.constraints
            .iter()
            .map(|c| {
                let (eigs, _) = sym_eig(&c.eval(x)?)?;
                Ok(*eigs.last().expect("nonempty block"))
            })
            .collect()
    }

    /// Largest eigenvalue of each base-set block at x.
    pub fn omega_eigs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.omega
            .iter()
            .map(|w| {
                let (eigs, _) = sym_eig(&w.eval(x)?)?;
                Ok(*eigs.last().expect("nonempty block"))
            })
            .collect()
    }

    /// Worst (largest) eigenvalue across all blocks; ≤ 0 means feasible.
    pub fn feasibility_margin(&self, x: &[f64]) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for e in self.constraint_eigs(x)? {
            worst = worst.max(e);
        }
        for e in self.omega_eigs(x)? {
            worst = worst.max(e);
        }
        Ok(worst)
    }
}

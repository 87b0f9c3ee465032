use matlin::{Mat, SymMat};
use sdp::AffineSymMap;

use crate::{Error, Result};

/// Number of free entries in a symmetric n×n matrix.
pub fn sym_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry (i, j) in the packed lower triangle, row-major.
///
/// This is the packing order used by [`MappingTerm::InverseOf`] and by
/// frontends that allocate decision variables for symmetric matrices.
pub fn sym_index(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// Symmetric unit basis matrix: eᵢeᵢᵀ on the diagonal, eᵢeⱼᵀ + eⱼeᵢᵀ off it.
///
/// With this basis a packed vector q reconstructs as Q = Σ q_{sym_index(i,j)} E_ij
/// and Q_ij equals the packed entry directly.
pub fn sym_basis(n: usize, i: usize, j: usize) -> SymMat {
    let mut e = SymMat::zeros(n);
    e.set(i, j, 1.0);
    e
}

/// Affine map x ↦ M₀ + Σ x_v·M_v into rows×cols matrices.
///
/// The coefficient list always has full length (one matrix per decision
/// variable, zero matrices included) so maps from different parts of a
/// model compose without index translation.
#[derive(Debug, Clone)]
pub struct AffineMat {
    rows: usize,
    cols: usize,
    m0: Mat,
    mi: Vec<Mat>,
}

impl AffineMat {
    pub fn new(m0: Mat, mi: Vec<Mat>) -> Result<Self> {
        let (rows, cols) = (m0.rows(), m0.cols());
        for (v, m) in mi.iter().enumerate() {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::Dimension(format!(
                    "coefficient {v} is {}x{}, map is {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(AffineMat { rows, cols, m0, mi })
    }

    /// Constant map with `nvars` zero coefficients.
    pub fn constant(m: Mat, nvars: usize) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        AffineMat {
            rows,
            cols,
            m0: m,
            mi: vec![Mat::zeros(rows, cols); nvars],
        }
    }

    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        AffineMat {
            rows,
            cols,
            m0: Mat::zeros(rows, cols),
            mi: vec![Mat::zeros(rows, cols); nvars],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.mi.len()
    }

    pub fn constant_part(&self) -> &Mat {
        &self.m0
    }

    pub fn constant_part_mut(&mut self) -> &mut Mat {
        &mut self.m0
    }

    pub fn coefficient(&self, v: usize) -> &Mat {
        &self.mi[v]
    }

    pub fn coefficient_mut(&mut self, v: usize) -> &mut Mat {
        &mut self.mi[v]
    }

    pub fn eval(&self, x: &[f64]) -> Result<Mat> {
        if x.len() != self.mi.len() {
            return Err(Error::Dimension(format!(
                "map has {} variables, point has {}",
                self.mi.len(),
                x.len()
            )));
        }
        let mut out = self.m0.clone();
        for (v, m) in self.mi.iter().enumerate() {
            if x[v] != 0.0 {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        out[(i, j)] += x[v] * m[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &AffineMat) -> Result<AffineMat> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &AffineMat) -> Result<AffineMat> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &AffineMat, s: f64) -> Result<AffineMat> {
        if self.rows != other.rows || self.cols != other.cols || self.mi.len() != other.mi.len() {
            return Err(Error::Dimension(
                "affine maps must agree in shape and variable count to combine".into(),
            ));
        }
        let m0 = self.m0.add(&other.m0.scale(s));
        let mi = self
            .mi
            .iter()
            .zip(&other.mi)
            .map(|(a, b)| a.add(&b.scale(s)))
            .collect();
        Ok(AffineMat {
            rows: self.rows,
            cols: self.cols,
            m0,
            mi,
        })
    }

    pub fn scale(&self, s: f64) -> AffineMat {
        AffineMat {
            rows: self.rows,
            cols: self.cols,
            m0: self.m0.scale(s),
            mi: self.mi.iter().map(|m| m.scale(s)).collect(),
        }
    }

    /// The map x ↦ M(x)ᵀ. Useful for squares of the form M(x)M(x)ᵀ,
    /// which equal N(x)ᵀN(x) with N the transposed map.
    pub fn transposed(&self) -> AffineMat {
        AffineMat {
            rows: self.cols,
            cols: self.rows,
            m0: self.m0.transpose(),
            mi: self.mi.iter().map(|m| m.transpose()).collect(),
        }
    }
}

/// One building block of a constraint side.
///
/// Terms live inside a symmetric block of dimension `dim` (the owning
/// constraint's size); square and inverse terms occupy the diagonal
/// corner starting at `offset` and are zero elsewhere.
#[derive(Debug, Clone)]
pub enum MappingTerm {
    /// A full-block affine contribution A₀ + Σ x_v·A_v.
    Affine(AffineSymMap),

    /// coeff·M(x)ᵀM(x) with M affine into rows×cols matrices; occupies
    /// the cols×cols corner at `offset`. Psd-convex for coeff > 0.
    SchurQuad {
        m: AffineMat,
        coeff: f64,
        offset: usize,
    },

    /// Q(x)⁻¹ where Q is the nq×nq symmetric matrix whose packed lower
    /// triangle (row-major, see [`sym_index`]) is the variable slice
    /// `vars`. Psd-convex on the Q ≻ 0 domain; evaluating or linearizing
    /// it elsewhere is a domain error.
    InverseOf {
        vars: Vec<usize>,
        nq: usize,
        offset: usize,
    },
}

impl MappingTerm {
    /// Smallest block dimension that can hold this term.
    pub fn min_dim(&self) -> usize {
        match self {
            MappingTerm::Affine(a) => a.dim(),
            MappingTerm::SchurQuad { m, offset, .. } => offset + m.cols(),
            MappingTerm::InverseOf { nq, offset, .. } => offset + nq,
        }
    }

    /// Structural checks against the owning block size and variable count.
    pub fn validate(&self, dim: usize, nvars: usize) -> Result<()> {
        match self {
            MappingTerm::Affine(a) => {
                if a.dim() != dim {
                    return Err(Error::Dimension(format!(
                        "affine term has dimension {}, block is {dim}",
                        a.dim()
                    )));
                }
                if a.nvars() != nvars {
                    return Err(Error::Dimension(format!(
                        "affine term has {} variables, problem has {nvars}",
                        a.nvars()
                    )));
                }
            }
            MappingTerm::SchurQuad { m, coeff, offset } => {
                if !coeff.is_finite() || *coeff <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "square term coefficient must be positive, got {coeff}"
                    )));
                }
                if m.nvars() != nvars {
                    return Err(Error::Dimension(format!(
                        "square term has {} variables, problem has {nvars}",
                        m.nvars()
                    )));
                }
                if offset + m.cols() > dim {
                    return Err(Error::Dimension(format!(
                        "square term needs corner {}..{} in a block of size {dim}",
                        offset,
                        offset + m.cols()
                    )));
                }
            }
            MappingTerm::InverseOf { vars, nq, offset } => {
                if *nq == 0 || vars.len() != sym_len(*nq) {
                    return Err(Error::Invalid(format!(
                        "inverse term of size {nq} needs {} packed variables, got {}",
                        sym_len(*nq),
                        vars.len()
                    )));
                }
                if offset + nq > dim {
                    return Err(Error::Dimension(format!(
                        "inverse term needs corner {}..{} in a block of size {dim}",
                        offset,
                        offset + nq
                    )));
                }
                if let Some(&v) = vars.iter().find(|&&v| v >= nvars) {
                    return Err(Error::Dimension(format!(
                        "inverse term refers to variable {v}, problem has {nvars}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Value of the term at x, embedded in a dim×dim symmetric block.
    pub fn eval(&self, x: &[f64], dim: usize) -> Result<SymMat> {
        match self {
            MappingTerm::Affine(a) => Ok(a.eval(x)?),
            MappingTerm::SchurQuad { m, coeff, offset } => {
                let mx = m.eval(x)?;
                Ok(embed_gram(&mx, *coeff, *offset, dim))
            }
            MappingTerm::InverseOf { vars, nq, offset } => {
                let q = gather_sym(x, vars, *nq);
                let qinv = sym_inverse(&q)?;
                Ok(embed_sym(&qinv, *offset, dim))
            }
        }
    }

    /// Directional derivative at x along d, as a dim×dim symmetric block.
    pub fn derivative_apply(&self, x: &[f64], d: &[f64], dim: usize) -> Result<SymMat> {
        match self {
            MappingTerm::Affine(a) => {
                // linear part only: A(x+td) - A(x) = t·Σ d_v A_v
                Ok(a.linear(d)?)
            }
            MappingTerm::SchurQuad { m, coeff, offset } => {
                let mx = m.eval(x)?;
                // d/dt M(x+td)ᵀM(x+td) = M_dᵀM(x) + M(x)ᵀM_d with M_d = Σ d_v M_v
                let mut md = Mat::zeros(m.rows(), m.cols());
                for (v, &dv) in d.iter().enumerate() {
                    if dv != 0.0 {
                        md = md.add(&m.coefficient(v).scale(dv));
                    }
                }
                let cross = md.transpose().matmul(&mx);
                let mut out = SymMat::zeros(dim);
                let c = m.cols();
                for i in 0..c {
                    for j in 0..=i {
                        let s = coeff * (cross[(i, j)] + cross[(j, i)]);
                        out.set(offset + i, offset + j, s);
                    }
                }
                Ok(out)
            }
            MappingTerm::InverseOf { vars, nq, offset } => {
                // d/dt (Q + tD)⁻¹ = -Q⁻¹ D Q⁻¹
                let q = gather_sym(x, vars, *nq);
                let qinv = sym_inverse(&q)?;
                let dq = gather_sym(d, vars, *nq);
                let w = qinv.to_mat().matmul(&dq.to_mat()).matmul(&qinv.to_mat());
                let mut out = SymMat::zeros(dim);
                for i in 0..*nq {
                    for j in 0..=i {
                        out.set(offset + i, offset + j, -0.5 * (w[(i, j)] + w[(j, i)]));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// coeff·MᵀM placed at the diagonal corner `offset` of a dim-sized block.
pub(crate) fn embed_gram(mx: &Mat, coeff: f64, offset: usize, dim: usize) -> SymMat {
    let (r, c) = (mx.rows(), mx.cols());
    let mut out = SymMat::zeros(dim);
    for i in 0..c {
        for j in 0..=i {
            let mut s = 0.0;
            for k in 0..r {
                s += mx[(k, i)] * mx[(k, j)];
            }
            out.set(offset + i, offset + j, coeff * s);
        }
    }
    out
}

/// Symmetric matrix placed at the diagonal corner `offset` of a dim block.
pub(crate) fn embed_sym(s: &SymMat, offset: usize, dim: usize) -> SymMat {
    let mut out = SymMat::zeros(dim);
    for i in 0..s.n() {
        for j in 0..=i {
            out.set(offset + i, offset + j, s.get(i, j));
        }
    }
    out
}

/// Reconstruct the packed symmetric variable from a full point.
pub(crate) fn gather_sym(x: &[f64], vars: &[usize], nq: usize) -> SymMat {
    let mut q = SymMat::zeros(nq);
    for i in 0..nq {
        for j in 0..=i {
            q.set(i, j, x[vars[sym_index(i, j)]]);
        }
    }
    q
}

/// Inverse of a positive definite matrix via its Cholesky factor.
pub(crate) fn sym_inverse(q: &SymMat) -> Result<SymMat> {
    let n = q.n();
    let l = matlin::cholesky(q).map_err(|e| match e {
        matlin::Error::NotPositiveDefinite { pivot, index } => Error::Domain(format!(
            "matrix variable is not positive definite (pivot {pivot:.3e} at {index})"
        )),
        other => Error::Kernel(other),
    })?;
    // Solve L Lᵀ X = I column by column.
    let mut inv = Mat::zeros(n, n);
    for col in 0..n {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
            inv[(i, col)] = y[i];
        }
    }
    Ok(inv.symmetrize())
}

/// The three ways a symmetric bilinear product XᵀY + YᵀX splits into a
/// difference of squares:
///
/// * `SumMinusParts`:  (X+Y)ᵀ(X+Y) − XᵀX − YᵀY
/// * `PartsMinusDiff`: XᵀX + YᵀY − (X−Y)ᵀ(X−Y)
/// * `Symmetric`:      ½(X+Y)ᵀ(X+Y) − ½(X−Y)ᵀ(X−Y)
///
/// All three are exact identities; they differ in which squares land on
/// the convex side and which get linearized. The symmetric form is the
/// default used by the synthesis frontends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitForm {
    SumMinusParts,
    PartsMinusDiff,
    Symmetric,
}

/// Split XᵀY + YᵀX into convex-side and concave-side square terms placed
/// at the diagonal corner `offset`. X and Y must share shape and variable
/// count; the product is cols×cols.
pub fn split_bilinear(
    x: &AffineMat,
    y: &AffineMat,
    form: SplitForm,
    offset: usize,
) -> Result<(Vec<MappingTerm>, Vec<MappingTerm>)> {
    if x.rows() != y.rows() || x.cols() != y.cols() || x.nvars() != y.nvars() {
        return Err(Error::Dimension(
            "bilinear factors must agree in shape and variable count".into(),
        ));
    }
    let quad = |m: AffineMat, coeff: f64| MappingTerm::SchurQuad { m, coeff, offset };
    match form {
        SplitForm::SumMinusParts => Ok((
            vec![quad(x.add(y)?, 1.0)],
            vec![quad(x.clone(), 1.0), quad(y.clone(), 1.0)],
        )),
        SplitForm::PartsMinusDiff => Ok((
            vec![quad(x.clone(), 1.0), quad(y.clone(), 1.0)],
            vec![quad(x.sub(y)?, 1.0)],
        )),
        SplitForm::Symmetric => Ok((
            vec![quad(x.add(y)?, 0.5)],
            vec![quad(x.sub(y)?, 0.5)],
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_index_is_row_major_lower_triangle() {
        assert_eq!(sym_index(0, 0), 0);
        assert_eq!(sym_index(1, 0), 1);
        assert_eq!(sym_index(1, 1), 2);
        assert_eq!(sym_index(2, 1), 4);
        assert_eq!(sym_index(1, 2), 4); // symmetric access
        assert_eq!(sym_len(3), 6);
    }

    #[test]
    fn gather_matches_basis_expansion() {
        let n = 3;
        let x: Vec<f64> = (0..sym_len(n)).map(|k| k as f64 + 1.0).collect();
        let vars: Vec<usize> = (0..sym_len(n)).collect();
        let q = gather_sym(&x, &vars, n);
        let mut rebuilt = SymMat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                rebuilt.add_assign(&sym_basis(n, i, j).scale(x[sym_index(i, j)]));
            }
        }
        assert!(q.sub(&rebuilt).norm_max() == 0.0);
    }

    #[test]
    fn affine_map_evaluates_and_transposes() {
        let m0 = Mat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let m1 = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, -1.0]]).unwrap();
        let a = AffineMat::new(m0.clone(), vec![m1.clone()]).unwrap();
        let at = a.transposed();
        let x = [2.0];
        let v = a.eval(&x).unwrap();
        let vt = at.eval(&x).unwrap();
        assert!(v.transpose().sub(&vt).norm_max() == 0.0);
        assert!((v[(0, 1)] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_of_positive_definite_round_trips() {
        let q = SymMat::from_fn(3, |i, j| if i == j { 3.0 } else { 0.5 });
        let qinv = sym_inverse(&q).unwrap();
        let prod = q.to_mat().matmul(&qinv.to_mat());
        assert!(prod.sub(&Mat::identity(3)).norm_max() < 1e-13);
    }

    #[test]
    fn inverse_rejects_indefinite_input() {
        let mut q = SymMat::zeros(2);
        q.set(0, 0, 1.0);
        q.set(1, 1, -1.0);
        assert!(matches!(sym_inverse(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn all_three_splits_reconstruct_the_product() {
        let x = AffineMat::constant(
            Mat::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]]).unwrap(),
            0,
        );
        let y = AffineMat::constant(
            Mat::from_rows(&[vec![2.0, 0.0], vec![-1.0, 1.5]]).unwrap(),
            0,
        );
        let xv = x.eval(&[]).unwrap();
        let yv = y.eval(&[]).unwrap();
        let target = xv
            .transpose()
            .matmul(&yv)
            .add(&yv.transpose().matmul(&xv));
        for form in [
            SplitForm::SumMinusParts,
            SplitForm::PartsMinusDiff,
            SplitForm::Symmetric,
        ] {
            let (g, h) = split_bilinear(&x, &y, form, 0).unwrap();
            let mut acc = SymMat::zeros(2);
            for t in &g {
                acc.add_assign(&t.eval(&[], 2).unwrap());
            }
            for t in &h {
                acc.axpy(-1.0, &t.eval(&[], 2).unwrap());
            }
            assert!(acc.to_mat().sub(&target).norm_max() < 1e-14);
        }
    }

    #[test]
    fn schur_quad_derivative_matches_product_rule() {
        // M(x) = M0 + x0·M1, term M(x)ᵀM(x), derivative along d is
        // d0·(M1ᵀM(x) + M(x)ᵀM1).
        let m0 = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let m1 = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let m = AffineMat::new(m0.clone(), vec![m1.clone()]).unwrap();
        let term = MappingTerm::SchurQuad {
            m,
            coeff: 1.0,
            offset: 0,
        };
        let x = [0.7];
        let d = [1.3];
        let got = term.derivative_apply(&x, &d, 2).unwrap();
        let mx = m0.add(&m1.scale(0.7));
        let md = m1.scale(1.3);
        let want = md
            .transpose()
            .matmul(&mx)
            .add(&mx.transpose().matmul(&md));
        assert!(got.to_mat().sub(&want).norm_max() < 1e-14);
    }
}

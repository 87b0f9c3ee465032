use crate::{Error, Mat, Result};
use std::fmt;

/// Dense symmetric matrix. Only the lower triangle is stored, so
/// `S[(i,j)] == S[(j,i)]` holds exactly by construction.
#[derive(Clone, PartialEq)]
pub struct SymMat {
    n: usize,
    // packed lower triangle, row by row: (0,0), (1,0), (1,1), (2,0), ...
    data: Vec<f64>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    // caller guarantees j <= i
    i * (i + 1) / 2 + j
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        SymMat { n, data: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut s = SymMat::zeros(n);
        for i in 0..n {
            s.set(i, i, 1.0);
        }
        s
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut s = SymMat::zeros(n);
        for i in 0..n {
            s.set(i, i, c);
        }
        s
    }

    /// Build from a callback; `f` is only consulted for the lower triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = SymMat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                s.set(i, j, f(i, j));
            }
        }
        s
    }

    /// Validate a full square array as symmetric (exact equality) and pack it.
    pub fn from_mat_exact(m: &Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("symmetric matrix must be square".into()));
        }
        for i in 0..m.rows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Dimension(format!(
                        "entry ({i},{j}) != ({j},{i}): not symmetric"
                    )));
                }
            }
        }
        Ok(SymMat::from_fn(m.rows(), |i, j| m[(i, j)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.data[tri(i, j)]
        } else {
            self.data[tri(j, i)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if j <= i {
            self.data[tri(i, j)] = v;
        } else {
            self.data[tri(j, i)] = v;
        }
    }

    pub fn add_assign(&mut self, other: &SymMat) {
        assert_eq!(self.n, other.n, "add_assign: dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn axpy(&mut self, c: f64, other: &SymMat) {
        assert_eq!(self.n, other.n, "axpy: dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn scale(&self, c: f64) -> SymMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Frobenius inner product trace(self * other).
    pub fn dot(&self, other: &SymMat) -> f64 {
        assert_eq!(self.n, other.n, "dot: dimension mismatch");
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.data[tri(i, j)] * other.data[tri(i, j)];
            }
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[tri(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Quadratic form v^T S v.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.n, "quad_form: length mismatch");
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.data[tri(i, j)] * v[i] * v[j];
            }
        }
        acc
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "matvec: length mismatch");
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }
}

impl fmt::Debug for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.to_mat())
    }
}

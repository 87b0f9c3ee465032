//! Decision-variable packing and affine-expression builders shared by the
//! synthesis frontends.
//!
//! A frontend allocates its variables through [`Pack`] (symmetric matrices
//! as packed lower triangles, gains row-major, scalars singly), then builds
//! `AffineMat` expressions over the full variable vector and assembles
//! symmetric constraint blocks with [`SymBlockBuilder`].

use ccd::{sym_index, sym_len, AffineMat};
use matlin::{Mat, SymMat};
use sdp::AffineSymMap;

use crate::{Error, Result};

/// A symmetric n×n matrix variable stored as its packed lower triangle
/// (row-major, the `ccd::sym_index` order).
#[derive(Debug, Clone, Copy)]
pub(crate) struct SymVar {
    pub start: usize,
    pub n: usize,
}

impl SymVar {
    pub fn len(&self) -> usize {
        sym_len(self.n)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        self.start + sym_index(i, j)
    }

    /// Variable indices in packed order, as `MappingTerm::InverseOf` expects.
    pub fn indices(&self) -> Vec<usize> {
        (self.start..self.start + self.len()).collect()
    }

    pub fn gather(&self, x: &[f64]) -> SymMat {
        SymMat::from_fn(self.n, |i, j| x[self.index(i, j)])
    }

    pub fn scatter(&self, m: &SymMat, x: &mut [f64]) {
        for i in 0..self.n {
            for j in 0..=i {
                x[self.index(i, j)] = m.get(i, j);
            }
        }
    }
}

/// A general rows×cols matrix variable stored row-major.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FullVar {
    pub start: usize,
    pub rows: usize,
    pub cols: usize,
}

impl FullVar {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        self.start + i * self.cols + j
    }

    pub fn gather(&self, x: &[f64]) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| x[self.index(i, j)])
    }

    pub fn scatter(&self, m: &Mat, x: &mut [f64]) {
        for i in 0..self.rows {
            for j in 0..self.cols {
                x[self.index(i, j)] = m[(i, j)];
            }
        }
    }
}

/// Sequential variable allocator.
#[derive(Debug, Default)]
pub(crate) struct Pack {
    next: usize,
}

impl Pack {
    pub fn new() -> Self {
        Pack::default()
    }

    pub fn sym(&mut self, n: usize) -> SymVar {
        let v = SymVar { start: self.next, n };
        self.next += v.len();
        v
    }

    pub fn full(&mut self, rows: usize, cols: usize) -> FullVar {
        let v = FullVar { start: self.next, rows, cols };
        self.next += v.len();
        v
    }

    pub fn scalar(&mut self) -> usize {
        let v = self.next;
        self.next += 1;
        v
    }

    pub fn len(&self) -> usize {
        self.next
    }
}

/// x ↦ P as a full n×n matrix expression.
pub(crate) fn sym_expr(v: &SymVar, nvars: usize) -> AffineMat {
    let mut am = AffineMat::zeros(v.n, v.n, nvars);
    for i in 0..v.n {
        for j in 0..=i {
            let c = am.coefficient_mut(v.index(i, j));
            c[(i, j)] = 1.0;
            if i != j {
                c[(j, i)] = 1.0;
            }
        }
    }
    am
}

/// x ↦ C₀ + L·F·R with F a matrix variable; L is p×F.rows, R is F.cols×q.
pub(crate) fn gain_expr(c0: Mat, l: &Mat, f: &FullVar, r: &Mat, nvars: usize) -> AffineMat {
    let (p, q) = (c0.rows(), c0.cols());
    debug_assert_eq!(l.rows(), p);
    debug_assert_eq!(l.cols(), f.rows);
    debug_assert_eq!(r.rows(), f.cols);
    debug_assert_eq!(r.cols(), q);
    let mut am = AffineMat::constant(c0, nvars);
    for i in 0..f.rows {
        for j in 0..f.cols {
            let c = am.coefficient_mut(f.index(i, j));
            for a in 0..p {
                let lai = l[(a, i)];
                if lai == 0.0 {
                    continue;
                }
                for b in 0..q {
                    c[(a, b)] = lai * r[(j, b)];
                }
            }
        }
    }
    am
}

/// Adds scale·x_v·I to an n×n expression in place.
pub(crate) fn add_scalar_identity(am: &mut AffineMat, v: usize, scale: f64) {
    debug_assert_eq!(am.rows(), am.cols());
    let n = am.rows();
    let c = am.coefficient_mut(v);
    for i in 0..n {
        c[(i, i)] += scale;
    }
}

/// K·M(x): left multiplication of an affine expression by a constant.
pub(crate) fn lmul(k: &Mat, am: &AffineMat) -> AffineMat {
    let mi = (0..am.nvars()).map(|v| k.matmul(am.coefficient(v))).collect();
    AffineMat::new(k.matmul(am.constant_part()), mi).expect("shapes preserved by lmul")
}

/// M(x)·K: right multiplication by a constant.
pub(crate) fn rmul(am: &AffineMat, k: &Mat) -> AffineMat {
    let mi = (0..am.nvars()).map(|v| am.coefficient(v).matmul(k)).collect();
    AffineMat::new(am.constant_part().matmul(k), mi).expect("shapes preserved by rmul")
}

/// Assembles one symmetric constraint block A₀ + Σ x_v·A_v from rectangular
/// affine pieces. Writing a piece at (r0, c0) with r0 ≠ c0 also fills the
/// mirrored region; diagonal pieces must be symmetric-valued.
pub(crate) struct SymBlockBuilder {
    dim: usize,
    a0: SymMat,
    ai: Vec<SymMat>,
}

impl SymBlockBuilder {
    pub fn new(dim: usize, nvars: usize) -> Self {
        SymBlockBuilder {
            dim,
            a0: SymMat::zeros(dim),
            ai: vec![SymMat::zeros(dim); nvars],
        }
    }

    /// Adds an affine piece with its top-left corner at (r0, c0).
    pub fn put(&mut self, r0: usize, c0: usize, am: &AffineMat) -> Result<()> {
        self.put_scaled(r0, c0, am, 1.0)
    }

    pub fn put_scaled(&mut self, r0: usize, c0: usize, am: &AffineMat, s: f64) -> Result<()> {
        let (rows, cols) = (am.rows(), am.cols());
        if r0 + rows > self.dim || c0 + cols > self.dim {
            return Err(Error::Dimension(format!(
                "piece {rows}x{cols} at ({r0},{c0}) exceeds block of size {}",
                self.dim
            )));
        }
        let diagonal = r0 == c0;
        if diagonal && rows != cols {
            return Err(Error::Dimension(
                "diagonal piece must be square".into(),
            ));
        }
        if !diagonal && r0 + rows > c0 && c0 + cols > r0 {
            return Err(Error::Dimension(
                "off-diagonal piece may not straddle the diagonal".into(),
            ));
        }
        let mut write = |dst: &mut SymMat, m: &Mat| {
            if diagonal {
                // Symmetric storage keeps the lower triangle; asymmetry at
                // round-off level is folded away by averaging.
                for i in 0..rows {
                    for j in 0..=i {
                        let v = dst.get(r0 + i, c0 + j) + s * 0.5 * (m[(i, j)] + m[(j, i)]);
                        dst.set(r0 + i, c0 + j, v);
                    }
                }
            } else {
                for i in 0..rows {
                    for j in 0..cols {
                        let v = dst.get(r0 + i, c0 + j) + s * m[(i, j)];
                        dst.set(r0 + i, c0 + j, v);
                    }
                }
            }
        };
        write(&mut self.a0, am.constant_part());
        for v in 0..am.nvars() {
            let coeff = am.coefficient(v);
            if coeff.norm_max() != 0.0 {
                write(&mut self.ai[v], coeff);
            }
        }
        Ok(())
    }

    /// Adds c·I to the constant part.
    pub fn shift_diag(&mut self, c: f64) {
        for i in 0..self.dim {
            let v = self.a0.get(i, i) + c;
            self.a0.set(i, i, v);
        }
    }

    pub fn build(self) -> AffineSymMap {
        AffineSymMap::new(self.a0, self.ai).expect("builder dimensions are consistent")
    }
}

/// Two 1×1 blocks realizing lo ≤ x_v ≤ hi.
pub(crate) fn scalar_box(v: usize, lo: f64, hi: f64, nvars: usize) -> Vec<AffineSymMap> {
    let mut upper = SymBlockBuilder::new(1, nvars);
    upper.shift_diag(-hi);
    let mut up_coeff = AffineMat::zeros(1, 1, nvars);
    up_coeff.coefficient_mut(v)[(0, 0)] = 1.0;
    upper.put(0, 0, &up_coeff).expect("1x1 piece fits");
    let mut lower = SymBlockBuilder::new(1, nvars);
    lower.shift_diag(lo);
    let mut lo_coeff = AffineMat::zeros(1, 1, nvars);
    lo_coeff.coefficient_mut(v)[(0, 0)] = -1.0;
    lower.put(0, 0, &lo_coeff).expect("1x1 piece fits");
    vec![upper.build(), lower.build()]
}

/// floor·I − P ⪯ 0.
pub(crate) fn sym_floor(v: &SymVar, floor: f64, nvars: usize) -> AffineSymMap {
    let mut b = SymBlockBuilder::new(v.n, nvars);
    b.shift_diag(floor);
    b.put_scaled(0, 0, &sym_expr(v, nvars), -1.0).expect("square piece fits");
    b.build()
}

/// P − ceil·I ⪯ 0.
pub(crate) fn sym_ceil(v: &SymVar, ceil: f64, nvars: usize) -> AffineSymMap {
    let mut b = SymBlockBuilder::new(v.n, nvars);
    b.shift_diag(-ceil);
    b.put(0, 0, &sym_expr(v, nvars)).expect("square piece fits");
    b.build()
}

/// Adds coeff per diagonal entry of a symmetric variable to a linear
/// objective (the trace functional).
pub(crate) fn add_trace_objective(v: &SymVar, coeff: f64, h: &mut [f64]) {
    for i in 0..v.n {
        h[v.index(i, i)] += coeff;
    }
}

/// Frobenius proximal weights for a symmetric variable: 1 on diagonal
/// entries, √2 on packed off-diagonal entries, so the weighted step norm
/// equals ‖ΔP‖_F.
pub(crate) fn sym_fro_weights(v: &SymVar, w: &mut [f64]) {
    for i in 0..v.n {
        for j in 0..=i {
            w[v.index(i, j)] = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
        }
    }
}

pub(crate) fn full_weights(v: &FullVar, w: &mut [f64]) {
    for k in 0..v.len() {
        w[v.start + k] = 1.0;
    }
}

use crate::{Error, Mat, Result};

/// LU factorization with partial pivoting, PA = LU packed in one matrix.
pub struct LuFactors {
    lu: Mat,
    piv: Vec<usize>,
}

/// Factor a square matrix; fails on (numerical) singularity.
pub fn lu_factor(a: &Mat) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::Dimension("LU requires a square matrix".into()));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let scale = lu.norm_max().max(1e-300);
    for k in 0..n {
        // pivot search
        let mut pk = k;
        let mut pmax = lu[(k, k)].abs();
        for i in k + 1..n {
            if lu[(i, k)].abs() > pmax {
                pmax = lu[(i, k)].abs();
                pk = i;
            }
        }
        if pmax <= 1e-14 * scale {
            return Err(Error::NumericalFailure(format!(
                "singular matrix in LU at step {k} (pivot {pmax:.3e})"
            )));
        }
        if pk != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pk, j)];
                lu[(pk, j)] = tmp;
            }
            piv.swap(k, pk);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let m = lu[(i, k)] / pivot;
            lu[(i, k)] = m;
            for j in k + 1..n {
                let upd = m * lu[(k, j)];
                lu[(i, j)] -= upd;
            }
        }
    }
    Ok(LuFactors { lu, piv })
}

/// Solve A x = b given the factorization of A.
pub fn lu_solve(f: &LuFactors, b: &[f64]) -> Vec<f64> {
    let n = f.lu.rows();
    assert_eq!(b.len(), n, "lu_solve: length mismatch");
    let mut x: Vec<f64> = f.piv.iter().map(|&p| b[p]).collect();
    // forward substitution with unit lower triangle
    for i in 1..n {
        let mut acc = x[i];
        for j in 0..i {
            acc -= f.lu[(i, j)] * x[j];
        }
        x[i] = acc;
    }
    // back substitution
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= f.lu[(i, j)] * x[j];
        }
        x[i] = acc / f.lu[(i, i)];
    }
    x
}

/// Solve A X = B for a matrix right-hand side.
pub fn solve(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.rows() != b.rows() {
        return Err(Error::Dimension("solve: row counts differ".into()));
    }
    let f = lu_factor(a)?;
    let mut x = Mat::zeros(b.rows(), b.cols());
    for j in 0..b.cols() {
        let col: Vec<f64> = (0..b.rows()).map(|i| b[(i, j)]).collect();
        let xc = lu_solve(&f, &col);
        for i in 0..b.rows() {
            x[(i, j)] = xc[i];
        }
    }
    Ok(x)
}

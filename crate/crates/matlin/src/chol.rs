use crate::{Error, Mat, Result, SymMat};

/// Cholesky factorization S = L L^T with L lower triangular.
///
/// Doubles as the positive-definiteness test: any pivot at or below
/// 1e-12 * max|S_ij| aborts with a not-positive-definite error.
pub fn cholesky(s: &SymMat) -> Result<Mat> {
    let n = s.n();
    let tol = 1e-12 * s.norm_max();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = s.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tol {
            return Err(Error::NotPositiveDefinite { pivot: d, index: j });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in j + 1..n {
            let mut v = s.get(i, j);
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok(l)
}

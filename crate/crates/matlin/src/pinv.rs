use crate::{Error, Mat, Result};

/// Thin SVD M = U diag(s) V^T by one-sided Jacobi rotations.
///
/// For an m x n input with m >= n, U is m x n with orthonormal columns where
/// the matching singular value is nonzero (exact-zero singular values get a
/// zero column, which still reconstructs M). Singular values are returned in
/// nonincreasing order. Inputs with m < n are handled by transposition.
pub fn svd(m: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    if m.rows() < m.cols() {
        let (u, s, v) = svd(&m.transpose())?;
        return Ok((v, s, u));
    }
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut v = Mat::identity(cols);

    let mut converged = false;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..rows {
                    app += a[(i, p)] * a[(i, p)];
                    aqq += a[(i, q)] * a[(i, q)];
                    apq += a[(i, p)] * a[(i, q)];
                }
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() || app == 0.0 || aqq == 0.0 {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..cols {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure("Jacobi SVD exceeded 60 sweeps".into()));
    }

    // singular values are the column norms; sort descending
    let mut sv: Vec<(f64, usize)> = (0..cols)
        .map(|j| {
            let nrm = (0..rows).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt();
            (nrm, j)
        })
        .collect();
    sv.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    let mut u = Mat::zeros(rows, cols);
    let mut vs = Mat::zeros(cols, cols);
    let mut s = vec![0.0; cols];
    for (out_j, &(nrm, j)) in sv.iter().enumerate() {
        s[out_j] = nrm;
        if nrm > 0.0 {
            for i in 0..rows {
                u[(i, out_j)] = a[(i, j)] / nrm;
            }
        }
        for i in 0..cols {
            vs[(i, out_j)] = v[(i, j)];
        }
    }
    Ok((u, s, vs))
}

/// Moore-Penrose pseudo-inverse via SVD, dropping singular values below
/// 1e-10 times the largest.
pub fn pseudo_inverse(m: &Mat) -> Result<Mat> {
    let (u, s, v) = svd(m)?;
    let cutoff = 1e-10 * s.first().copied().unwrap_or(0.0);
    let mut out = Mat::zeros(m.cols(), m.rows());
    for k in 0..s.len() {
        if s[k] <= cutoff || s[k] == 0.0 {
            continue;
        }
        let inv = 1.0 / s[k];
        for i in 0..m.cols() {
            let vik = v[(i, k)] * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..m.rows() {
                out[(i, j)] += vik * u[(j, k)];
            }
        }
    }
    Ok(out)
}

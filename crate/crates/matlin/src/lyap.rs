use crate::{kron, lu_factor, lu_solve, real_schur, Error, Mat, Result, SymMat};

/// Solve the continuous Lyapunov equation A^T P + P A + Q = 0 for symmetric P.
///
/// Bartels-Stewart: reduce A to real Schur form A = U T U^T, solve the
/// transformed equation T^T Y + Y T + U^T Q U = 0 block column by block
/// column (1- or 2-wide, following T's quasi-triangular structure), then map
/// back P = U Y U^T. Requires A Hurwitz, which also guarantees every block
/// system encountered is nonsingular.
pub fn lyapunov_solve(a: &Mat, q: &SymMat) -> Result<SymMat> {
    if !a.is_square() {
        return Err(Error::Dimension("Lyapunov solve requires square A".into()));
    }
    if a.rows() != q.n() {
        return Err(Error::Dimension(format!(
            "A is {}x{} but Q is {}x{}",
            a.rows(),
            a.cols(),
            q.n(),
            q.n()
        )));
    }
    let n = a.rows();
    let schur = real_schur(a)?;
    let alpha = schur.eig_re.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    if alpha >= 0.0 {
        return Err(Error::Unstable(alpha));
    }
    let u = &schur.q;
    let t = &schur.t;
    let qt = u.transpose().matmul(&q.to_mat()).matmul(u); // U^T Q U

    // block column sweep
    let mut y = Mat::zeros(n, n);
    let mut k = 0usize;
    while k < n {
        // width of diagonal block at k
        let w = if k + 1 < n && t[(k + 1, k)] != 0.0 { 2 } else { 1 };

        // rhs = -Qt[:, k..k+w] - Y[:, j<k] * T[j<k, k..k+w]
        let mut rhs = Mat::zeros(n, w);
        for i in 0..n {
            for c in 0..w {
                let mut acc = -qt[(i, k + c)];
                for j in 0..k {
                    acc -= y[(i, j)] * t[(j, k + c)];
                }
                rhs[(i, c)] = acc;
            }
        }

        // solve (I_w (x) T^T + Tkk^T (x) I_n) y_block = vec(rhs)
        let tkk = t.block(k, k, w, w);
        let big = kron(&Mat::identity(w), &t.transpose()).add(&kron(&tkk.transpose(), &Mat::identity(n)));
        let f = lu_factor(&big)?;
        let mut b = Vec::with_capacity(n * w);
        for c in 0..w {
            for i in 0..n {
                b.push(rhs[(i, c)]);
            }
        }
        let x = lu_solve(&f, &b);
        for c in 0..w {
            for i in 0..n {
                y[(i, k + c)] = x[c * n + i];
            }
        }
        k += w;
    }

    let p = u.matmul(&y).matmul(&u.transpose());
    Ok(p.symmetrize())
}

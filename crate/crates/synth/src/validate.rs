//! Closed-loop validation oracles.
//!
//! Everything here re-derives its answer from the plant data and a gain
//! using dense eigenvalue, Lyapunov, and bisection machinery. No solver
//! variables are consulted, so these routines double as independent checks
//! on the synthesis frontends.

use crate::plant::Plant;
use crate::{Error, Result};
use matlin::{eigenvalues, lyapunov_solve, spectral_abscissa, svd, Mat};

/// Spectral abscissa of the closed loop A + B·F·C.
pub fn validate_stability(plant: &Plant, f: &Mat) -> Result<f64> {
    plant.check_gain(f)?;
    Ok(spectral_abscissa(&plant.a_closed(f))?)
}

/// Closed-loop H₂ norm of w → z through the full performance channel
/// C₁ + D₁₂·F·C, requiring D₁₁ = 0 and a Hurwitz closed loop.
pub fn validate_h2(plant: &Plant, f: &Mat) -> Result<f64> {
    plant.check_gain(f)?;
    if !crate::plant::is_zero(&plant.d11) {
        return Err(Error::Invalid(
            "H2 validation needs a strictly proper disturbance channel (D11 = 0)".into(),
        ));
    }
    h2_norm_parts(&plant.a_closed(f), &plant.b1, &plant.c_closed(f))
}

/// Closed-loop H∞ norm of w → z through C₁ + D₁₂·F·C with feedthrough
/// D₁₁, requiring a Hurwitz closed loop.
pub fn validate_hinf(plant: &Plant, f: &Mat) -> Result<f64> {
    plant.check_gain(f)?;
    hinf_norm_parts(&plant.a_closed(f), &plant.b1, &plant.c_closed(f), &plant.d11)
}

/// H₂ norm of (A, B, C) via the controllability Gramian:
/// ‖G‖₂ = √trace(C·W·Cᵀ) with A·W + W·Aᵀ + B·Bᵀ = 0.
pub(crate) fn h2_norm_parts(a: &Mat, b: &Mat, c: &Mat) -> Result<f64> {
    let alpha = spectral_abscissa(a)?;
    if alpha >= 0.0 {
        return Err(Error::Unstable(alpha));
    }
    let bbt = matlin::SymMat::from_mat_exact(&b.matmul(&b.transpose()).symmetrize())?;
    let w = lyapunov_solve(&a.transpose(), &bbt)?;
    let cw = c.matmul(&w.to_mat());
    // trace(C W Cᵀ) as the sum of row quadratic forms, nonnegative up to
    // roundoff since W ⪰ 0.
    let mut tr = 0.0;
    for i in 0..c.rows() {
        tr += cw.row(i).iter().zip(c.row(i)).map(|(x, y)| x * y).sum::<f64>();
    }
    Ok(tr.max(0.0).sqrt())
}

/// H∞ norm of C·(sI−A)⁻¹·B + D by Hamiltonian bisection. `a` must be
/// Hurwitz. Accurate to a relative gap of about 1e-7.
pub(crate) fn hinf_norm_parts(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<f64> {
    let alpha = spectral_abscissa(a)?;
    if alpha >= 0.0 {
        return Err(Error::Unstable(alpha));
    }
    // Lower bound: the largest gain over the feedthrough and a frequency
    // sample that covers dc, the mode magnitudes, and a broad log grid.
    let mut lo = sigma_max(d)?;
    for w in sample_frequencies(a)? {
        lo = lo.max(transfer_gain(a, b, c, d, w)?);
    }

    // Upper bound by doubling until the Hamiltonian pencil clears the
    // imaginary axis, which certifies level > norm.
    let mut hi = (2.0 * lo).max(1e-3);
    let mut doublings = 0;
    while has_imaginary_eig(&hamiltonian(a, b, c, d, hi)?)? {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Invalid(
                "H-infinity bisection found no finite upper bound".into(),
            ));
        }
    }

    while hi - lo > 1e-9 + 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if has_imaginary_eig(&hamiltonian(a, b, c, d, mid)?)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest singular value, 0 for an empty or zero matrix.
fn sigma_max(m: &Mat) -> Result<f64> {
    if m.norm() == 0.0 {
        return Ok(0.0);
    }
    let (_, s, _) = svd(m)?;
    Ok(s.first().copied().unwrap_or(0.0))
}

fn sample_frequencies(a: &Mat) -> Result<Vec<f64>> {
    let mut ws = vec![0.0];
    for (re, im) in eigenvalues(a)? {
        let mag = (re * re + im * im).sqrt();
        if mag > 0.0 {
            ws.push(mag);
        }
        if im.abs() > 0.0 {
            ws.push(im.abs());
        }
    }
    for k in 0..=24 {
        ws.push(10f64.powf(-2.0 + 4.0 * k as f64 / 24.0));
    }
    Ok(ws)
}

/// σ_max of C·(jωI−A)⁻¹·B + D at one frequency, via the real augmented
/// system [[−A, −ωI], [ωI, −A]]·[xr; xi] = [b; 0] solved column by column.
fn transfer_gain(a: &Mat, b: &Mat, c: &Mat, d: &Mat, w: f64) -> Result<f64> {
    let n = a.rows();
    let aug = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (ii, jj) = (i % n, j % n);
        match (bi, bj) {
            (0, 0) | (1, 1) => -a.get(ii, jj),
            (0, 1) => {
                if ii == jj {
                    -w
                } else {
                    0.0
                }
            }
            _ => {
                if ii == jj {
                    w
                } else {
                    0.0
                }
            }
        }
    });
    let rhs = Mat::from_fn(2 * n, b.cols(), |i, j| if i < n { b.get(i, j) } else { 0.0 });
    let x = matlin::solve(&aug, &rhs)?;
    let xr = x.block(0, 0, n, b.cols());
    let xi = x.block(n, 0, n, b.cols());
    let gr = c.matmul(&xr).add(d);
    let gi = c.matmul(&xi);
    // σ values of Gr + i·Gi are those of the real embedding
    // [[Gr, −Gi], [Gi, Gr]], each repeated twice.
    let (p, q) = (gr.rows(), gr.cols());
    let emb = Mat::from_fn(2 * p, 2 * q, |i, j| {
        let (bi, bj) = (i / p, j / q);
        let (ii, jj) = (i % p, j % q);
        match (bi, bj) {
            (0, 0) | (1, 1) => gr.get(ii, jj),
            (0, 1) => -gi.get(ii, jj),
            _ => gi.get(ii, jj),
        }
    });
    sigma_max(&emb)
}

/// Level-γ Hamiltonian of (A, B, C, D): imaginary-axis eigenvalues exist
/// exactly when γ ≤ ‖G‖∞ (A Hurwitz, γ > σ_max(D)).
fn hamiltonian(a: &Mat, b: &Mat, c: &Mat, d: &Mat, gamma: f64) -> Result<Mat> {
    let n = a.rows();
    let nw = b.cols();
    // R = γ²I − DᵀD must be positive definite; below the feedthrough gain
    // the level is a lower bound by definition, so report it as crossing.
    let r = Mat::identity(nw).scale(gamma * gamma).sub(&d.transpose().matmul(d));
    let rinv = matlin::solve(&r, &Mat::identity(nw))?;
    let brd = b.matmul(&rinv).matmul(&d.transpose());
    let a11 = a.add(&brd.matmul(c));
    let a12 = b.matmul(&rinv).matmul(&b.transpose());
    let inner = Mat::identity(d.rows()).add(&d.matmul(&rinv).matmul(&d.transpose()));
    let a21 = c.transpose().matmul(&inner).matmul(c).scale(-1.0);
    let mut h = Mat::zeros(2 * n, 2 * n);
    h.set_block(0, 0, &a11);
    h.set_block(0, n, &a12);
    h.set_block(n, 0, &a21);
    h.set_block(n, n, &a11.transpose().scale(-1.0));
    Ok(h)
}

fn has_imaginary_eig(h: &Mat) -> Result<bool> {
    for (re, im) in eigenvalues(h)? {
        let mag = (re * re + im * im).sqrt();
        if re.abs() <= 1e-7 * (1.0 + mag) {
            return Ok(true);
        }
    }
    Ok(false)
}

use crate::{Error, Mat, Result};

/// Real Schur decomposition A = Q T Q^T with Q orthogonal and T upper
/// quasi-triangular (1x1 blocks for real eigenvalues, 2x2 blocks for
/// complex-conjugate pairs).
pub struct SchurForm {
    pub q: Mat,
    pub t: Mat,
    /// eigenvalue real parts
    pub eig_re: Vec<f64>,
    /// eigenvalue imaginary parts
    pub eig_im: Vec<f64>,
}

/// Compute the real Schur form by Householder reduction to Hessenberg form
/// followed by the implicit double-shift QR iteration with accumulation of
/// all transformations.
pub fn real_schur(a: &Mat) -> Result<SchurForm> {
    if !a.is_square() {
        return Err(Error::Dimension("Schur form requires a square matrix".into()));
    }
    let n = a.rows();
    let mut h = a.clone();
    let mut v = Mat::identity(n);
    if n > 1 {
        orthes(&mut h, &mut v);
        // clear the Householder vectors stored below the subdiagonal
        for i in 2..n {
            for j in 0..i - 1 {
                h[(i, j)] = 0.0;
            }
        }
    }
    let (re, im) = hqr2(&mut h, &mut v)?;
    Ok(SchurForm { q: v, t: h, eig_re: re, eig_im: im })
}

/// Eigenvalues of a general square matrix as (re, im) pairs, ordered as they
/// appear on the Schur form's diagonal.
pub fn eigenvalues(a: &Mat) -> Result<Vec<(f64, f64)>> {
    let s = real_schur(a)?;
    Ok(s.eig_re.into_iter().zip(s.eig_im).collect())
}

/// Spectral abscissa: the largest eigenvalue real part.
pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    let s = real_schur(a)?;
    Ok(s.eig_re.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Householder reduction to upper Hessenberg form, accumulating the
/// orthogonal transform into `v`.
fn orthes(h: &mut Mat, v: &mut Mat) {
    let n = h.rows();
    let low = 0;
    let high = n - 1;
    let mut ort = vec![0.0; n];

    for m in low + 1..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale != 0.0 {
            let mut hsum = 0.0;
            for i in (m..=high).rev() {
                ort[i] = h[(i, m - 1)] / scale;
                hsum += ort[i] * ort[i];
            }
            let mut g = hsum.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            hsum -= ort[m] * g;
            ort[m] -= g;

            for j in m..n {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i] * h[(i, j)];
                }
                f /= hsum;
                for i in m..=high {
                    let upd = f * ort[i];
                    h[(i, j)] -= upd;
                }
            }
            for i in 0..=high {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j] * h[(i, j)];
                }
                f /= hsum;
                for j in m..=high {
                    let upd = f * ort[j];
                    h[(i, j)] -= upd;
                }
            }
            ort[m] *= scale;
            h[(m, m - 1)] = scale * g;
        }
    }

    // accumulate (Algol ortran)
    for m in (low + 1..high).rev() {
        if h[(m, m - 1)] != 0.0 {
            for i in m + 1..=high {
                ort[i] = h[(i, m - 1)];
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i] * v[(i, j)];
                }
                // double division avoids possible underflow
                g = (g / ort[m]) / h[(m, m - 1)];
                for i in m..=high {
                    let upd = g * ort[i];
                    v[(i, j)] += upd;
                }
            }
        }
    }
}

/// Francis double-shift QR iteration on an upper Hessenberg matrix `h`,
/// accumulating transformations into `v`; on success `h` is upper
/// quasi-triangular. Returns eigenvalue (re, im) arrays.
#[allow(clippy::too_many_lines, unused_assignments)]
fn hqr2(h: &mut Mat, v: &mut Mat) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = h.rows();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    if nn == 1 {
        d[0] = h[(0, 0)];
        return Ok((d, e));
    }
    let mut n = nn - 1;
    let low = 0usize;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z);
    p = 0.0;
    q = 0.0;
    r = 0.0;

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    if norm == 0.0 {
        return Ok((d, e));
    }

    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let max_total = 60 * nn;

    loop {
        // find the active block [l, n]
        let mut l = n;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // one root found
            if n > low {
                h[(n, n - 1)] = 0.0; // deflate: the test declared it negligible
            }
            h[(n, n)] += exshift;
            d[n] = h[(n, n)];
            e[n] = 0.0;
            if n == low {
                break;
            }
            n -= 1;
            iter = 0;
        } else if l + 1 == n {
            // two roots found
            if n - 1 > low {
                h[(n - 1, n - 2)] = 0.0; // deflate
            }
            let w = h[(n, n - 1)] * h[(n - 1, n)];
            p = (h[(n - 1, n - 1)] - h[(n, n)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(n, n)] += exshift;
            h[(n - 1, n - 1)] += exshift;
            let x = h[(n, n)];

            if q >= 0.0 {
                // real pair: split the 2x2 block with a rotation
                z = if p >= 0.0 { p + z } else { p - z };
                d[n - 1] = x + z;
                d[n] = d[n - 1];
                if z != 0.0 {
                    d[n] = x - w / z;
                }
                e[n - 1] = 0.0;
                e[n] = 0.0;
                let xsub = h[(n, n - 1)];
                s = xsub.abs() + z.abs();
                if s != 0.0 {
                    p = xsub / s;
                    q = z / s;
                    r = (p * p + q * q).sqrt();
                    p /= r;
                    q /= r;
                    for j in n - 1..nn {
                        z = h[(n - 1, j)];
                        h[(n - 1, j)] = q * z + p * h[(n, j)];
                        h[(n, j)] = q * h[(n, j)] - p * z;
                    }
                    for i in 0..=n {
                        z = h[(i, n - 1)];
                        h[(i, n - 1)] = q * z + p * h[(i, n)];
                        h[(i, n)] = q * h[(i, n)] - p * z;
                    }
                    for i in low..=high {
                        z = v[(i, n - 1)];
                        v[(i, n - 1)] = q * z + p * v[(i, n)];
                        v[(i, n)] = q * v[(i, n)] - p * z;
                    }
                }
                // the rotation was built to annihilate this entry
                h[(n, n - 1)] = 0.0;
            } else {
                // complex pair
                d[n - 1] = x + p;
                d[n] = x + p;
                e[n - 1] = z;
                e[n] = -z;
            }
            if n == low + 1 {
                break;
            }
            n -= 2;
            iter = 0;
        } else {
            // no convergence yet: form shift
            let mut x = h[(n, n)];
            let mut y = 0.0;
            let mut w = 0.0;
            if l < n {
                y = h[(n - 1, n - 1)];
                w = h[(n, n - 1)] * h[(n - 1, n)];
            }

            if iter == 10 {
                // exceptional shift
                exshift += x;
                for i in low..=n {
                    h[(i, i)] -= x;
                }
                s = h[(n, n - 1)].abs() + h[(n - 1, n - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = 0.964;
                    w = 0.964;
                }
            }

            iter += 1;
            total_iter += 1;
            if total_iter > max_total {
                return Err(Error::NumericalFailure(format!(
                    "QR iteration exceeded {max_total} sweeps"
                )));
            }

            // look for two consecutive small sub-diagonal elements
            let mut m = n - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=n {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR sweep on rows l..=n, columns m..=n; the sweep leaves
            // stale pre-reflector values at annihilated bulge positions, so
            // the quasi-triangular result is cleaned after the main loop
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    let xs = p.abs() + q.abs() + r.abs();
                    if xs == 0.0 {
                        continue;
                    }
                    p /= xs;
                    q /= xs;
                    r /= xs;
                    s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s == 0.0 {
                        continue;
                    }
                    h[(k, k - 1)] = -s * xs;
                    apply_householder(h, v, k, n, notlast, p, q, r, s, low, high);
                } else {
                    s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s == 0.0 {
                        continue;
                    }
                    if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    apply_householder(h, v, k, n, notlast, p, q, r, s, low, high);
                }
            }
        }
    }

    // every entry below the first subdiagonal is a mathematical zero the
    // sweeps skipped writing; clear the residue so T is exactly
    // quasi-triangular
    for i in 2..nn {
        for j in 0..i - 1 {
            h[(i, j)] = 0.0;
        }
    }

    Ok((d, e))
}


/// One step of the double-shift sweep: apply the 3x3 (or trailing 2x2)
/// Householder reflector determined by (p,q,r,s) to rows/columns around k.
#[allow(clippy::too_many_arguments)]
fn apply_householder(
    h: &mut Mat,
    v: &mut Mat,
    k: usize,
    n: usize,
    notlast: bool,
    p0: f64,
    q0: f64,
    r0: f64,
    s: f64,
    low: usize,
    high: usize,
) {
    let nn = h.rows();
    let p = p0 + s;
    let x = p / s;
    let y = q0 / s;
    let z = r0 / s;
    let q = q0 / p;
    let r = r0 / p;

    for j in k..nn {
        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
        if notlast {
            pp += r * h[(k + 2, j)];
            h[(k + 2, j)] -= pp * z;
        }
        h[(k, j)] -= pp * x;
        h[(k + 1, j)] -= pp * y;
    }
    let imax = n.min(k + 3);
    for i in 0..=imax {
        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
        if notlast {
            pp += z * h[(i, k + 2)];
            h[(i, k + 2)] -= pp * r;
        }
        h[(i, k)] -= pp;
        h[(i, k + 1)] -= pp * q;
    }
    for i in low..=high {
        let mut pp = x * v[(i, k)] + y * v[(i, k + 1)];
        if notlast {
            pp += z * v[(i, k + 2)];
            v[(i, k + 2)] -= pp * r;
        }
        v[(i, k)] -= pp;
        v[(i, k + 1)] -= pp * q;
    }
}

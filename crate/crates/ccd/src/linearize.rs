use matlin::{Mat, SymMat};
use sdp::AffineSymMap;

use crate::term::{embed_sym, gather_sym, sym_index, sym_inverse, MappingTerm};
use crate::{Error, Result};

/// Tangent of the concave side at x_k, as an affine map of full block size.
///
/// For a square term coeff·M(x)ᵀM(x) the tangent is
/// coeff·(M(x)ᵀM(xₖ) + M(xₖ)ᵀM(x) − M(xₖ)ᵀM(xₖ)); for an inverse term it is
/// 2Q(xₖ)⁻¹ − Q(xₖ)⁻¹Q(x)Q(xₖ)⁻¹. Both agree with the term at x = x_k and
/// under-estimate it everywhere else in the psd order, which is what makes
/// the subproblems inner approximations.
pub fn linearize_concave(
    h_terms: &[MappingTerm],
    x_k: &[f64],
    dim: usize,
) -> Result<AffineSymMap> {
    let nvars = x_k.len();
    let mut a0 = SymMat::zeros(dim);
    let mut ai = vec![SymMat::zeros(dim); nvars];

    for term in h_terms {
        match term {
            MappingTerm::Affine(_) => {
                return Err(Error::Invalid(
                    "affine terms belong on the convex side".into(),
                ))
            }
            MappingTerm::SchurQuad { m, coeff, offset } => {
                if m.nvars() != nvars {
                    return Err(Error::Dimension(format!(
                        "square term has {} variables, point has {nvars}",
                        m.nvars()
                    )));
                }
                let mk = m.eval(x_k)?;
                // constant: M0ᵀMₖ + MₖᵀM0 − MₖᵀMₖ
                let mut c0 = cross_gram(m.constant_part(), &mk, *coeff, *offset, dim);
                let mkk = crate::term::embed_gram(&mk, *coeff, *offset, dim);
                c0.axpy(-1.0, &mkk);
                a0.add_assign(&c0);
                for v in 0..nvars {
                    let mv = m.coefficient(v);
                    if mv.norm_max() == 0.0 {
                        continue;
                    }
                    ai[v].add_assign(&cross_gram(mv, &mk, *coeff, *offset, dim));
                }
            }
            MappingTerm::InverseOf { vars, nq, offset } => {
                if let Some(&v) = vars.iter().find(|&&v| v >= nvars) {
                    return Err(Error::Dimension(format!(
                        "inverse term refers to variable {v}, point has {nvars}"
                    )));
                }
                let qk = gather_sym(x_k, vars, *nq);
                let qinv = sym_inverse(&qk)?;
                a0.add_assign(&embed_sym(&qinv.scale(2.0), *offset, dim));
                // columns of Q⁻¹; Q⁻¹ E_ij Q⁻¹ is built from outer products
                let qm = qinv.to_mat();
                for i in 0..*nq {
                    for j in 0..=i {
                        let v = vars[sym_index(i, j)];
                        let mut e = SymMat::zeros(dim);
                        for r in 0..*nq {
                            for c in 0..=r {
                                let val = if i == j {
                                    qm[(r, i)] * qm[(c, i)]
                                } else {
                                    qm[(r, i)] * qm[(c, j)] + qm[(r, j)] * qm[(c, i)]
                                };
                                e.set(offset + r, offset + c, val);
                            }
                        }
                        ai[v].axpy(-1.0, &e);
                    }
                }
            }
        }
    }
    Ok(AffineSymMap::new(a0, ai)?)
}

/// coeff·(AᵀB + BᵀA) embedded at the diagonal corner `offset`.
fn cross_gram(a: &Mat, b: &Mat, coeff: f64, offset: usize, dim: usize) -> SymMat {
    let (r, c) = (a.rows(), a.cols());
    debug_assert_eq!(b.rows(), r);
    debug_assert_eq!(b.cols(), c);
    let mut out = SymMat::zeros(dim);
    for i in 0..c {
        for j in 0..=i {
            let mut s = 0.0;
            for k in 0..r {
                s += a[(k, i)] * b[(k, j)] + b[(k, i)] * a[(k, j)];
            }
            out.set(offset + i, offset + j, coeff * s);
        }
    }
    out
}

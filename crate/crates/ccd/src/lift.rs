use matlin::SymMat;
use sdp::{AffineSymMap, QsdpProblem};

use crate::linearize::linearize_concave;
use crate::solve::{qk_weights, CcdConfig};
use crate::term::MappingTerm;
use crate::{CcdProblem, Result};

/// Build the convex SDP subproblem at the current iterate.
///
/// Each constraint G(x) − H(x) ⪯ 0 turns into a single LMI block: the
/// concave side is replaced by its tangent at x_k, and every square term
/// coeff·M(x)ᵀM(x) left on the convex side is absorbed by a Schur
/// complement. Writing L(x) for the affine remainder and M̃(x) for the
/// stacked scaled factors √coeff·M(x), the block is
///
///   [ L(x)   M̃(x)ᵀ ]
///   [ M̃(x)   −I    ]  ⪯ 0,
///
/// which holds exactly when L(x) + M̃(x)ᵀM̃(x) ⪯ 0. Base-set blocks are
/// appended unchanged after the constraint blocks, in order, so subproblem
/// duals line up: block i < constraints.len() belongs to constraint i.
///
/// The objective gains the proximal term ρ_k/2·‖Q_k(x − x_k)‖², folded
/// into the quadratic and linear parts.
///
/// Points feasible for the subproblem are feasible for the original
/// problem, because the tangent never exceeds the concave side.
pub fn lift_subproblem(p: &CcdProblem, x_k: &[f64], cfg: &CcdConfig) -> Result<QsdpProblem> {
    let n = p.nvars;
    if x_k.len() != n {
        return Err(crate::Error::Dimension(format!(
            "expansion point has {} entries, problem has {n} variables",
            x_k.len()
        )));
    }

    let mut b_quad = p.b_obj.clone();
    let mut h = p.h_obj.clone();
    if let Some(w) = qk_weights(cfg, n)? {
        for v in 0..n {
            let ww = cfg.rho_k * w[v] * w[v];
            if ww != 0.0 {
                b_quad.set(v, v, b_quad.get(v, v) + ww);
                h[v] -= ww * x_k[v];
            }
        }
    }

    let mut blocks = Vec::with_capacity(p.constraints.len() + p.omega.len());
    for c in &p.constraints {
        // Affine remainder: sum of affine convex terms minus the tangent.
        let hk = linearize_concave(&c.h, x_k, c.dim)?;
        let mut a0 = hk.constant().scale(-1.0);
        let mut ai: Vec<SymMat> = (0..n).map(|v| hk.coefficient(v).scale(-1.0)).collect();
        let mut quads = Vec::new();
        for t in &c.g {
            match t {
                MappingTerm::Affine(a) => {
                    a0.add_assign(a.constant());
                    for v in 0..n {
                        ai[v].add_assign(a.coefficient(v));
                    }
                }
                MappingTerm::SchurQuad { m, coeff, offset } => {
                    quads.push((m, coeff.sqrt(), *offset));
                }
                MappingTerm::InverseOf { .. } => {
                    return Err(crate::Error::Invalid(
                        "inverse terms on the convex side are not supported".into(),
                    ))
                }
            }
        }

        if quads.is_empty() {
            blocks.push(AffineSymMap::new(a0, ai)?);
            continue;
        }

        let m_total: usize = quads.iter().map(|(m, _, _)| m.rows()).sum();
        let dim = c.dim + m_total;
        let mut big0 = SymMat::zeros(dim);
        for i in 0..c.dim {
            for j in 0..=i {
                big0.set(i, j, a0.get(i, j));
            }
        }
        for d in c.dim..dim {
            big0.set(d, d, -1.0);
        }
        let mut row = c.dim;
        for (m, sqrtc, offset) in &quads {
            let m0 = m.constant_part();
            for t in 0..m.rows() {
                for u in 0..m.cols() {
                    let val = sqrtc * m0[(t, u)];
                    if val != 0.0 {
                        big0.set(row + t, offset + u, val);
                    }
                }
            }
            row += m.rows();
        }

        let mut big_ai = Vec::with_capacity(n);
        for v in 0..n {
            let mut bv = SymMat::zeros(dim);
            if ai[v].norm_max() != 0.0 {
                for i in 0..c.dim {
                    for j in 0..=i {
                        bv.set(i, j, ai[v].get(i, j));
                    }
                }
            }
            let mut row = c.dim;
            for (m, sqrtc, offset) in &quads {
                let mv = m.coefficient(v);
                if mv.norm_max() != 0.0 {
                    for t in 0..m.rows() {
                        for u in 0..m.cols() {
                            let val = sqrtc * mv[(t, u)];
                            if val != 0.0 {
                                bv.set(row + t, offset + u, val);
                            }
                        }
                    }
                }
                row += m.rows();
            }
            big_ai.push(bv);
        }
        blocks.push(AffineSymMap::new(big0, big_ai)?);
    }

    for w in &p.omega {
        blocks.push(w.clone());
    }

    Ok(QsdpProblem {
        nvars: n,
        b_quad,
        h,
        blocks,
    })
}

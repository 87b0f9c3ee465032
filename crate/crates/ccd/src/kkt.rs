use matlin::{sym_eig, Mat, SymMat};

use crate::term::{gather_sym, sym_index, sym_inverse, MappingTerm};
use crate::{CcdProblem, Error, Result};

/// Dual blocks for a first-order stationarity check: one matrix per
/// constraint (original block size) and one per base-set block.
#[derive(Debug, Clone)]
pub struct Multipliers {
    pub constraints: Vec<SymMat>,
    pub omega: Vec<SymMat>,
}

/// First-order residual of the original problem at x.
///
/// Returns the largest of three quantities:
///
/// * stationarity: ‖∇f(x) + Σᵢ D[Gᵢ−Hᵢ](x)*Λᵢ + Σ_w W_w*Λ_w‖∞, the
///   gradient of the Lagrangian with the supplied dual blocks,
/// * feasibility: the worst positive eigenvalue over all blocks
///   (zero when feasible),
/// * complementarity: maxᵢ |⟨(Gᵢ−Hᵢ)(x), Λᵢ⟩| and the same for the
///   base-set blocks.
///
/// The multipliers are expected psd (they come from the subproblem solver
/// at tolerance level); no projection is applied here.
pub fn kkt_residual(p: &CcdProblem, x: &[f64], m: &Multipliers) -> Result<f64> {
    if x.len() != p.nvars {
        return Err(Error::Dimension(format!(
            "point has {} entries, problem has {} variables",
            x.len(),
            p.nvars
        )));
    }
    if m.constraints.len() != p.constraints.len() || m.omega.len() != p.omega.len() {
        return Err(Error::Dimension(format!(
            "multiplier count {}/{} does not match problem {}/{}",
            m.constraints.len(),
            m.omega.len(),
            p.constraints.len(),
            p.omega.len()
        )));
    }

    let mut grad = p.b_obj.matvec(x);
    for v in 0..p.nvars {
        grad[v] += p.h_obj[v];
    }

    let mut feas = 0.0f64;
    let mut comp = 0.0f64;

    for (c, lam) in p.constraints.iter().zip(&m.constraints) {
        if lam.n() != c.dim {
            return Err(Error::Dimension(format!(
                "multiplier block is {}x{}, constraint is {}x{}",
                lam.n(),
                lam.n(),
                c.dim,
                c.dim
            )));
        }
        for t in &c.g {
            add_term_adjoint(t, x, lam, 1.0, &mut grad)?;
        }
        for t in &c.h {
            add_term_adjoint(t, x, lam, -1.0, &mut grad)?;
        }
        let val = c.eval(x)?;
        let (eigs, _) = sym_eig(&val)?;
        feas = feas.max(*eigs.last().expect("nonempty block"));
        comp = comp.max(val.dot(lam).abs());
    }

    for (w, lam) in p.omega.iter().zip(&m.omega) {
        let adj = w.adjoint(lam)?;
        for v in 0..p.nvars {
            grad[v] += adj[v];
        }
        let val = w.eval(x)?;
        let (eigs, _) = sym_eig(&val)?;
        feas = feas.max(*eigs.last().expect("nonempty block"));
        comp = comp.max(val.dot(lam).abs());
    }

    let stat = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
    Ok(stat.max(feas).max(comp))
}

/// grad += sign · ⟨D(term at x), Λ⟩ variable by variable.
fn add_term_adjoint(
    t: &MappingTerm,
    x: &[f64],
    lam: &SymMat,
    sign: f64,
    grad: &mut [f64],
) -> Result<()> {
    match t {
        MappingTerm::Affine(a) => {
            let adj = a.adjoint(lam)?;
            for (g, v) in grad.iter_mut().zip(adj) {
                *g += sign * v;
            }
        }
        MappingTerm::SchurQuad { m, coeff, offset } => {
            // ⟨∂_v coeff·MᵀM, Λ⟩ = 2·coeff·⟨M_v, M(x)·Λ_sub⟩
            let c = m.cols();
            let lam_sub = Mat::from_fn(c, c, |i, j| lam.get(offset + i, offset + j));
            let mx = m.eval(x)?;
            let w = mx.matmul(&lam_sub);
            for v in 0..grad.len() {
                let mv = m.coefficient(v);
                if mv.norm_max() == 0.0 {
                    continue;
                }
                grad[v] += sign * 2.0 * coeff * mv.dot(&w);
            }
        }
        MappingTerm::InverseOf { vars, nq, offset } => {
            // ∂_v Q⁻¹ = −Q⁻¹ E_v Q⁻¹, so ⟨∂_v, Λ⟩ = −⟨E_v, Q⁻¹ Λ_sub Q⁻¹⟩
            let q = gather_sym(x, vars, *nq);
            let qinv = sym_inverse(&q)?.to_mat();
            let lam_sub = Mat::from_fn(*nq, *nq, |i, j| lam.get(offset + i, offset + j));
            let w = qinv.matmul(&lam_sub).matmul(&qinv);
            for i in 0..*nq {
                for j in 0..=i {
                    let inner = if i == j {
                        w[(i, i)]
                    } else {
                        w[(i, j)] + w[(j, i)]
                    };
                    grad[vars[sym_index(i, j)]] -= sign * inner;
                }
            }
        }
    }
    Ok(())
}

use matlin::{sym_eig, SymMat};

use crate::problem::{IpmConfig, QsdpProblem, QsdpStatus};
use crate::{solve_qsdp, AffineSymMap, Error, Result};

/// Box radius applied to the z variables inside the Phase-I problem so the
/// auxiliary program is bounded; the floor bounds the auxiliary scalar t.
const BOX_RADIUS: f64 = 1e5;
const T_FLOOR: f64 = 1e3;

/// Builds the Phase-I program: minimize t subject to eval_j(z) - t I <= 0
/// for every block, |z_i| <= BOX_RADIUS, t >= -T_FLOOR. The start (z=0,
/// t = max-eig of the constant terms + 1) is strictly feasible by
/// construction.
pub(crate) fn build_phase1(
    blocks: &[AffineSymMap],
    nvars: usize,
) -> Result<(QsdpProblem, Vec<f64>, f64)> {
    if blocks.is_empty() {
        return Err(Error::Dimension("Phase-I needs at least one block".into()));
    }
    let nv = nvars + 1;
    let t_idx = nvars;

    let mut ext_blocks = Vec::with_capacity(blocks.len() + 2 * nvars + 1);
    let mut t0 = f64::NEG_INFINITY;
    for b in blocks {
        if b.nvars() != nvars {
            return Err(Error::Dimension(format!(
                "block has {} variables, expected {nvars}",
                b.nvars()
            )));
        }
        let d = b.dim();
        let mut ai: Vec<SymMat> = (0..nvars).map(|i| b.coefficient(i).clone()).collect();
        ai.push(SymMat::scaled_identity(d, -1.0));
        ext_blocks.push(AffineSymMap::new(b.constant().clone(), ai)?);
        let (vals, _) = sym_eig(b.constant())?;
        t0 = t0.max(vals[d - 1]);
    }
    let t0 = (t0 + 1.0).max(-0.999 * T_FLOOR);

    let scalar_block = |coeff_idx: usize, coeff: f64, constant: f64| -> Result<AffineSymMap> {
        let mut ai = vec![SymMat::zeros(1); nv];
        ai[coeff_idx] = SymMat::scaled_identity(1, coeff);
        AffineSymMap::new(SymMat::scaled_identity(1, constant), ai)
    };
    for i in 0..nvars {
        ext_blocks.push(scalar_block(i, 1.0, -BOX_RADIUS)?);
        ext_blocks.push(scalar_block(i, -1.0, -BOX_RADIUS)?);
    }
    ext_blocks.push(scalar_block(t_idx, -1.0, -T_FLOOR)?);

    let mut h = vec![0.0; nv];
    h[t_idx] = 1.0;
    let ext = QsdpProblem { nvars: nv, b_quad: SymMat::zeros(nv), h, blocks: ext_blocks };

    let mut start = vec![0.0; nv];
    start[t_idx] = t0;
    Ok((ext, start, BOX_RADIUS))
}

/// Finds a strictly feasible point for the joint LMI system, or certifies
/// that none exists. Returns (z, margin): margin > 0 means eval_j(z) <=
/// -margin I for every block; margin <= 0 means no strictly feasible point
/// was found (the system is infeasible up to the Phase-I tolerance).
pub fn phase1_feasibility(blocks: &[AffineSymMap]) -> Result<(Vec<f64>, f64)> {
    let nvars = blocks.first().map(|b| b.nvars()).unwrap_or(0);
    let (ext, start, _) = build_phase1(blocks, nvars)?;
    let cfg = IpmConfig { tol: 1e-9, max_iters: 150, ftb: 0.98, start: Some(start) };
    let sol = solve_qsdp(&ext, &cfg)?;
    match sol.status {
        QsdpStatus::Optimal => {
            let t_star = sol.z[nvars];
            Ok((sol.z[..nvars].to_vec(), -t_star))
        }
        QsdpStatus::IterLimit => Err(Error::IterLimit("Phase-I hit the iteration cap")),
        QsdpStatus::NumericalFailure => {
            Err(Error::NumericalFailure("Phase-I solve broke down".into()))
        }
        QsdpStatus::PrimalInfeasible => unreachable!("Phase-I always has an interior start"),
    }
}

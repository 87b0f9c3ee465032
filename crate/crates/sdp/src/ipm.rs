use matlin::{cholesky, sym_eig, Mat, SymMat};

use crate::phase1::build_phase1;
use crate::problem::{IpmConfig, QsdpProblem, QsdpSolution, QsdpStatus};
use crate::Result;

/// Solves the quadratic SDP by a feasible-start primal-dual path-following
/// method with Nesterov-Todd scaling and a Mehrotra corrector. When no
/// strictly feasible start is supplied in `cfg`, a Phase-I problem is solved
/// first; its optimum decides `PrimalInfeasible`.
pub fn solve_qsdp(p: &QsdpProblem, cfg: &IpmConfig) -> Result<QsdpSolution> {
    p.validate()?;

    let z0 = match starting_point(p, cfg)? {
        StartOutcome::Interior(z) => z,
        StartOutcome::Infeasible(z) => {
            let s = slacks(p, &z)?;
            return Ok(QsdpSolution {
                objective: p.objective(&z),
                v: p.blocks.iter().map(|b| SymMat::zeros(b.dim())).collect(),
                s,
                z,
                status: QsdpStatus::PrimalInfeasible,
                kkt_residual: f64::INFINITY,
                iterations: 0,
            });
        }
        StartOutcome::Breakdown => {
            return Ok(QsdpSolution {
                z: vec![0.0; p.nvars],
                v: vec![],
                s: vec![],
                status: QsdpStatus::NumericalFailure,
                kkt_residual: f64::INFINITY,
                iterations: 0,
                objective: f64::NAN,
            });
        }
    };
    run_ipm(p, cfg, z0)
}

enum StartOutcome {
    Interior(Vec<f64>),
    Infeasible(Vec<f64>),
    Breakdown,
}

fn starting_point(p: &QsdpProblem, cfg: &IpmConfig) -> Result<StartOutcome> {
    if let Some(z0) = &cfg.start {
        if z0.len() == p.nvars && strictly_feasible(p, z0)? {
            return Ok(StartOutcome::Interior(z0.clone()));
        }
        log::debug!("supplied start is not strictly feasible; falling back to Phase-I");
    }
    let (ext, start, _radius) = build_phase1(&p.blocks, p.nvars)?;
    let cfg1 = IpmConfig { tol: 1e-9, max_iters: 120, ftb: cfg.ftb, start: Some(start) };
    let sol = run_ipm(&ext, &cfg1, cfg1.start.clone().unwrap())?;
    let t_star = sol.z[p.nvars];
    let z: Vec<f64> = sol.z[..p.nvars].to_vec();
    match sol.status {
        QsdpStatus::Optimal | QsdpStatus::IterLimit => {
            if t_star > 1e-7 {
                Ok(StartOutcome::Infeasible(z))
            } else if strictly_feasible(p, &z)? {
                Ok(StartOutcome::Interior(z))
            } else {
                Ok(StartOutcome::Breakdown)
            }
        }
        _ => Ok(StartOutcome::Breakdown),
    }
}

fn strictly_feasible(p: &QsdpProblem, z: &[f64]) -> Result<bool> {
    for b in &p.blocks {
        let s = b.eval(z)?.scale(-1.0);
        if cholesky(&s).is_err() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn slacks(p: &QsdpProblem, z: &[f64]) -> Result<Vec<SymMat>> {
    p.blocks.iter().map(|b| Ok(b.eval(z)?.scale(-1.0))).collect()
}

/// Per-block Nesterov-Todd scaling data for one iteration.
struct BlockScaling {
    w_inv: Mat,
    w_half: Mat,
    w_mhalf: Mat,
    /// U = W^{-1/2} S W^{-1/2}, the scaled point (equals W^{1/2} V W^{1/2}).
    u: Mat,
}

fn nt_scaling(s: &SymMat, v: &SymMat) -> Result<BlockScaling> {
    let l = cholesky(s)?;
    let lt_v_l = l.transpose().matmul(&v.to_mat()).matmul(&l);
    let inner = sym_fn(&lt_v_l.symmetrize(), |x| 1.0 / x.max(1e-300).sqrt())?;
    let w = l.matmul(&inner).matmul(&l.transpose()).symmetrize();
    let w_inv = sym_fn(&w, |x| 1.0 / x.max(1e-300))?;
    let w_half = sym_fn(&w, |x| x.max(0.0).sqrt())?;
    let w_mhalf = sym_fn(&w, |x| 1.0 / x.max(1e-300).sqrt())?;
    let u = w_mhalf.matmul(&s.to_mat()).matmul(&w_mhalf).symmetrize().to_mat();
    Ok(BlockScaling { w_inv, w_half, w_mhalf, u })
}

/// Q f(Lambda) Q' for a symmetric matrix.
fn sym_fn(m: &SymMat, f: impl Fn(f64) -> f64) -> Result<Mat> {
    let (vals, vecs) = sym_eig(m)?;
    let n = m.n();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let fv = f(vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    Ok(scaled.matmul(&vecs.transpose()))
}

/// Largest step alpha with X + alpha dX >= 0 (X positive definite).
///
/// Uses the eigendecomposition of X rather than a Cholesky factor so that
/// nearly singular iterates (tiny slack eigenvalues close to convergence)
/// degrade into small steps instead of a factorization error.
fn max_step(x: &SymMat, dx: &SymMat) -> Result<f64> {
    let (vals, vecs) = sym_eig(x)?;
    let floor = 1e-300;
    let n = x.n();
    // T = X^{-1/2} dX X^{-1/2} in X's eigenbasis
    let inner = vecs.transpose().matmul(&dx.to_mat()).matmul(&vecs);
    let t = SymMat::from_fn(n, |i, j| {
        inner[(i, j)] / (vals[i].max(floor).sqrt() * vals[j].max(floor).sqrt())
    });
    let (tvals, _) = sym_eig(&t)?;
    let lam_min = tvals[0];
    if lam_min >= -1e-16 {
        Ok(f64::INFINITY)
    } else {
        Ok(-1.0 / lam_min)
    }
}

/// Solves L Y = B for lower-triangular L.
fn forward_solve(l: &Mat, b: &Mat) -> Mat {
    let n = l.rows();
    let m = b.cols();
    let mut y = b.clone();
    for j in 0..m {
        for i in 0..n {
            let mut acc = y[(i, j)];
            for k in 0..i {
                acc -= l[(i, k)] * y[(k, j)];
            }
            y[(i, j)] = acc / l[(i, i)];
        }
    }
    y
}

/// Solves U X + X U = R in U's eigenbasis (U symmetric positive definite).
fn sylvester_u(u: &Mat, r: &Mat) -> Result<Mat> {
    let (vals, vecs) = sym_eig(&u.symmetrize())?;
    let n = u.rows();
    let rq = vecs.transpose().matmul(r).matmul(&vecs);
    let mut x = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = (vals[i] + vals[j]).max(1e-300);
            x[(i, j)] = rq[(i, j)] / denom;
        }
    }
    Ok(vecs.matmul(&x).matmul(&vecs.transpose()))
}

fn run_ipm(p: &QsdpProblem, cfg: &IpmConfig, z0: Vec<f64>) -> Result<QsdpSolution> {
    let m = p.blocks.len();
    let n = p.nvars;
    let dims_total: f64 = p.blocks.iter().map(|b| b.dim() as f64).sum();
    let h_scale = 1.0 + p.h.iter().fold(0.0f64, |a, &x| a.max(x.abs()));

    let mut z = z0;
    let mut s = slacks(p, &z)?;
    // centered dual start V = mu0 S^{-1}
    let mu0 = {
        let mean: f64 =
            s.iter().map(|si| si.trace() / si.n() as f64).sum::<f64>() / m.max(1) as f64;
        mean.clamp(1e-3, 1e3)
    };
    let mut v: Vec<SymMat> = Vec::with_capacity(m);
    for si in &s {
        let inv = sym_fn(si, |x| 1.0 / x.max(1e-300))?;
        v.push(inv.scale(mu0).symmetrize());
    }

    let finish = |z: Vec<f64>,
                  v: Vec<SymMat>,
                  s: Vec<SymMat>,
                  status: QsdpStatus,
                  kkt: f64,
                  iters: usize,
                  obj: f64| {
        Ok(QsdpSolution { z, v, s, status, kkt_residual: kkt, iterations: iters, objective: obj })
    };

    let mut mu_prev = f64::INFINITY;
    let mut stalls = 0usize;

    for iter in 0..cfg.max_iters {
        // residuals at the current iterate
        let obj = p.objective(&z);
        let mut r_d: Vec<f64> = p.b_quad.matvec(&z);
        for (r, hi) in r_d.iter_mut().zip(&p.h) {
            *r += hi;
        }
        for (b, vj) in p.blocks.iter().zip(&v) {
            for (r, a) in r_d.iter_mut().zip(b.adjoint(vj)?) {
                *r += a;
            }
        }
        let gap: f64 = v.iter().zip(&s).map(|(vj, sj)| vj.dot(sj)).sum();
        let mu = gap / dims_total;
        let rel_gap = gap.abs() / (1.0 + obj.abs());
        let stat_rel = r_d.iter().fold(0.0f64, |a, &x| a.max(x.abs())) / h_scale;
        // the dual residual is cleaned up multiplicatively by the step but
        // floors at roundoff amplified by the Schur conditioning, so it gets
        // its own tolerance instead of chasing cfg.tol
        let stat_tol = cfg.tol.max(1e-7);
        log::trace!("ipm iter {iter}: obj {obj:.6e} gap {rel_gap:.3e} stat {stat_rel:.3e}");

        if rel_gap <= cfg.tol && stat_rel <= stat_tol {
            return finish(z, v, s, QsdpStatus::Optimal, rel_gap, iter, obj);
        }
        // "near" distinguishes a run that stalled within sight of the answer
        // (still useful to callers) from a genuine numerical breakdown
        let near = rel_gap <= 1e3 * cfg.tol && stat_rel <= 1e3 * stat_tol;
        if mu > 0.99 * mu_prev {
            stalls += 1;
            if stalls >= 10 {
                let status =
                    if near { QsdpStatus::IterLimit } else { QsdpStatus::NumericalFailure };
                return finish(z, v, s, status, rel_gap, iter, obj);
            }
        } else {
            stalls = 0;
        }
        mu_prev = mu;

        // Nesterov-Todd scaling and Schur complement assembly
        let mut scalings = Vec::with_capacity(m);
        for (sj, vj) in s.iter().zip(&v) {
            match nt_scaling(sj, vj) {
                Ok(sc) => scalings.push(sc),
                Err(_) => return finish(z, v, s, QsdpStatus::NumericalFailure, rel_gap, iter, obj),
            }
        }
        let mut schur = p.b_quad.to_mat();
        let mut sandwiches: Vec<Vec<SymMat>> = Vec::with_capacity(m);
        for (b, sc) in p.blocks.iter().zip(&scalings) {
            let mut ys = Vec::with_capacity(n);
            for q in 0..n {
                let aq = b.coefficient(q).to_mat();
                ys.push(sc.w_inv.matmul(&aq).matmul(&sc.w_inv).symmetrize());
            }
            for pidx in 0..n {
                let ap = b.coefficient(pidx);
                for (q, yq) in ys.iter().enumerate().take(pidx + 1) {
                    let val = ap.dot(yq);
                    schur[(pidx, q)] += val;
                    if q != pidx {
                        schur[(q, pidx)] += val;
                    }
                }
            }
            sandwiches.push(ys);
        }
        let schur_l = {
            let mut reg = 0.0;
            let base = schur.norm_max();
            loop {
                let mut sreg = schur.clone();
                for i in 0..n {
                    sreg[(i, i)] += reg;
                }
                match cholesky(&sreg.symmetrize()) {
                    Ok(l) => break Some(l),
                    Err(_) if reg < 1e-6 * (1.0 + base) => {
                        reg = if reg == 0.0 { 1e-14 * (1.0 + base) } else { reg * 100.0 };
                    }
                    Err(_) => break None,
                }
            }
        };
        let Some(schur_l) = schur_l else {
            return finish(z, v, s, QsdpStatus::NumericalFailure, rel_gap, iter, obj);
        };
        let solve_factored = |rhs: &[f64]| -> Vec<f64> {
            let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
            let y = forward_solve(&schur_l, &b);
            let mut out = vec![0.0; n];
            for i in (0..n).rev() {
                let mut acc = y[(i, 0)];
                for k in i + 1..n {
                    acc -= schur_l[(k, i)] * out[k];
                }
                out[i] = acc / schur_l[(i, i)];
            }
            out
        };
        // two rounds of iterative refinement against the unregularized
        // matrix; the Schur complement grows ill-conditioned as mu shrinks
        let solve_schur = |rhs: &[f64]| -> Vec<f64> {
            let mut x = solve_factored(rhs);
            for _ in 0..2 {
                let mx = schur.matvec(&x);
                let r: Vec<f64> = rhs.iter().zip(&mx).map(|(b, m)| b - m).collect();
                let c = solve_factored(&r);
                for (xi, ci) in x.iter_mut().zip(&c) {
                    *xi += ci;
                }
            }
            x
        };

        // predictor (affine scaling direction): target V S -> 0
        let d_aff: Vec<SymMat> = v.iter().map(|vj| vj.scale(-1.0)).collect();
        let mut rhs_aff = vec![0.0; n];
        for i in 0..n {
            rhs_aff[i] = -r_d[i];
        }
        for (b, dj) in p.blocks.iter().zip(&d_aff) {
            for (r, a) in rhs_aff.iter_mut().zip(b.adjoint(dj)?) {
                *r -= a;
            }
        }
        let dz_aff = solve_schur(&rhs_aff);
        let mut ds_aff = Vec::with_capacity(m);
        let mut dv_aff = Vec::with_capacity(m);
        for ((b, sc), dj) in p.blocks.iter().zip(&scalings).zip(&d_aff) {
            let dsj = b.linear(&dz_aff)?.scale(-1.0);
            let corr = sc.w_inv.matmul(&dsj.to_mat()).matmul(&sc.w_inv).symmetrize();
            let dvj = dj.sub(&corr);
            ds_aff.push(dsj);
            dv_aff.push(dvj);
        }
        let mut ap_aff = 1.0f64;
        let mut ad_aff = 1.0f64;
        for ((sj, vj), (dsj, dvj)) in s.iter().zip(&v).zip(ds_aff.iter().zip(&dv_aff)) {
            ap_aff = ap_aff.min(cfg.ftb * max_step(sj, dsj)?);
            ad_aff = ad_aff.min(cfg.ftb * max_step(vj, dvj)?);
        }
        let mut gap_aff = 0.0;
        for ((sj, vj), (dsj, dvj)) in s.iter().zip(&v).zip(ds_aff.iter().zip(&dv_aff)) {
            let s_new = sj.add(&dsj.scale(ap_aff));
            let v_new = vj.add(&dvj.scale(ad_aff));
            gap_aff += v_new.dot(&s_new);
        }
        let mu_aff = gap_aff / dims_total;
        let mut sigma = (mu_aff / mu).max(0.0).powi(3).min(1.0);
        if rel_gap <= cfg.tol {
            // gap target already met: hold the center instead of driving mu
            // further down while the dual residual finishes converging
            sigma = 1.0;
        }

        // corrector: solve U dU + dU U = sigma mu I - U^2 - sym(Ua_s Ua_v)
        let mut d_corr = Vec::with_capacity(m);
        for (sc, (dsj, dvj)) in scalings.iter().zip(ds_aff.iter().zip(&dv_aff)) {
            let ua_s = sc.w_mhalf.matmul(&dsj.to_mat()).matmul(&sc.w_mhalf);
            let ua_v = sc.w_half.matmul(&dvj.to_mat()).matmul(&sc.w_half);
            let cross = ua_s.matmul(&ua_v).add(&ua_v.matmul(&ua_s)).scale(0.5);
            let mut target = sc.u.matmul(&sc.u).scale(-1.0).sub(&cross);
            let d = target.rows();
            for i in 0..d {
                target[(i, i)] += sigma * mu;
            }
            let du = sylvester_u(&sc.u, &target)?;
            let dcj = sc.w_mhalf.matmul(&du).matmul(&sc.w_mhalf).scale(2.0).symmetrize();
            d_corr.push(dcj);
        }
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = -r_d[i];
        }
        for (b, dj) in p.blocks.iter().zip(&d_corr) {
            for (r, a) in rhs.iter_mut().zip(b.adjoint(dj)?) {
                *r -= a;
            }
        }
        let dz = solve_schur(&rhs);
        let mut ds = Vec::with_capacity(m);
        let mut dv = Vec::with_capacity(m);
        for ((b, sc), dj) in p.blocks.iter().zip(&scalings).zip(&d_corr) {
            let dsj = b.linear(&dz)?.scale(-1.0);
            let corr = sc.w_inv.matmul(&dsj.to_mat()).matmul(&sc.w_inv).symmetrize();
            dv.push(dj.sub(&corr));
            ds.push(dsj);
        }
        let mut ap = 1.0f64;
        let mut ad = 1.0f64;
        for ((sj, vj), (dsj, dvj)) in s.iter().zip(&v).zip(ds.iter().zip(&dv)) {
            ap = ap.min(cfg.ftb * max_step(sj, dsj)?);
            ad = ad.min(cfg.ftb * max_step(vj, dvj)?);
        }
        if ap < 1e-10 && ad < 1e-10 {
            let status = if near { QsdpStatus::IterLimit } else { QsdpStatus::NumericalFailure };
            return finish(z, v, s, status, rel_gap, iter, obj);
        }

        // primal update keeps S = -eval(z) exactly; back off if rounding
        // pushed a slack off the cone
        let z_prev = z.clone();
        let mut ok = false;
        for _ in 0..30 {
            z = z_prev.iter().zip(&dz).map(|(a, d)| a + ap * d).collect();
            let s_try = slacks(p, &z)?;
            if s_try.iter().all(|sj| cholesky(sj).is_ok()) {
                s = s_try;
                ok = true;
                break;
            }
            ap *= 0.7;
        }
        if !ok {
            let status = if near { QsdpStatus::IterLimit } else { QsdpStatus::NumericalFailure };
            return finish(z_prev, v, s, status, rel_gap, iter, obj);
        }
        for (vj, dvj) in v.iter_mut().zip(&dv) {
            *vj = vj.add(&dvj.scale(ad));
        }
    }

    let obj = p.objective(&z);
    let gap: f64 = v.iter().zip(&s).map(|(vj, sj)| vj.dot(sj)).sum();
    let kkt = gap.abs() / (1.0 + obj.abs());
    finish(z, v, s, QsdpStatus::IterLimit, kkt, cfg.max_iters, obj)
}

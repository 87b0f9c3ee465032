//! End-to-end behavior of the outer loop: convergence on analytic
//! problems, descent bookkeeping, and the first-order residual.

mod common;

use ccd::{
    ccd_solve, kkt_residual, AffineMat, CcdConfig, CcdConstraint, CcdProblem, CcdStatus,
    MappingTerm, Multipliers, QkMode,
};
use common::*;
use matlin::{Mat, SymMat};
use rand::Rng;
use sdp::AffineSymMap;

/// min x subject to x² − 2x ≤ 0, written with the square on the convex
/// side. The feasible set is [0, 2]; the minimum sits at the left edge.
fn interval_problem() -> CcdProblem {
    let m = AffineMat::new(
        Mat::zeros(1, 1),
        vec![Mat::from_rows(&[vec![1.0]]).unwrap()],
    )
    .unwrap();
    let g_affine = AffineSymMap::new(
        SymMat::zeros(1),
        vec![SymMat::from_fn(1, |_, _| -2.0)],
    )
    .unwrap();
    CcdProblem {
        nvars: 1,
        b_obj: SymMat::zeros(1),
        h_obj: vec![1.0],
        constraints: vec![CcdConstraint {
            g: vec![
                MappingTerm::Affine(g_affine),
                MappingTerm::SchurQuad {
                    m,
                    coeff: 1.0,
                    offset: 0,
                },
            ],
            h: vec![],
            dim: 1,
        }],
        omega: vec![],
    }
}

#[test]
fn interval_problem_reaches_the_left_endpoint() {
    let p = interval_problem();
    let cfg = CcdConfig::default();
    let (x, trace, status) = ccd_solve(&p, &[1.0], &cfg).unwrap();
    assert!(x[0].abs() <= 1e-6, "final point {:.3e}", x[0]);
    assert!(trace.records.len() <= 3, "took {} steps", trace.records.len());
    assert_eq!(status, CcdStatus::SmallStep);

    // first-order residual at the solution with the subproblem duals;
    // the analytic multiplier of the interval constraint at 0 is 1/2
    let mult = trace.multipliers.as_ref().unwrap();
    let r = kkt_residual(&p, &x, mult).unwrap();
    assert!(r <= 1e-6, "stationary residual {r:.3e}");
    let lam = mult.constraints[0].get(0, 0);
    assert!((lam - 0.5).abs() <= 0.05, "multiplier {lam:.6}");
}

#[test]
fn minimizer_start_stops_after_one_iteration() {
    // f = ½‖x‖², one inactive affine constraint; the start is stationary
    let a = AffineSymMap::new(
        SymMat::from_fn(1, |_, _| -5.0),
        vec![SymMat::from_fn(1, |_, _| 1.0), SymMat::zeros(1)],
    )
    .unwrap();
    let p = CcdProblem {
        nvars: 2,
        b_obj: SymMat::identity(2),
        h_obj: vec![0.0, 0.0],
        constraints: vec![CcdConstraint {
            g: vec![MappingTerm::Affine(a)],
            h: vec![],
            dim: 1,
        }],
        omega: vec![],
    };
    let (x, trace, status) = ccd_solve(&p, &[0.0, 0.0], &CcdConfig::default()).unwrap();
    assert_eq!(trace.records.len(), 1);
    assert_eq!(status, CcdStatus::SmallStep);
    assert!(x[0].abs().max(x[1].abs()) <= 1e-6);
}

#[test]
fn infeasible_or_boundary_starts_are_rejected() {
    let p = interval_problem();
    let cfg = CcdConfig::default();
    assert!(matches!(
        ccd_solve(&p, &[3.0], &cfg),
        Err(ccd::Error::InfeasibleStart { .. })
    ));
    // x=2 sits exactly on the boundary, short of the strictness margin
    assert!(matches!(
        ccd_solve(&p, &[2.0], &cfg),
        Err(ccd::Error::InfeasibleStart { .. })
    ));
}

/// A three-variable problem with a genuine concave side: the trace must
/// be monotone, every iterate feasible, and each accepted step has to
/// decrease the objective by at least the strong-convexity bound
/// ρ_f/2·‖Δx‖² + ρ_k·‖Q_k Δx‖².
#[test]
fn descent_obeys_the_per_step_decrease_bound() {
    let mut r = rng(606);
    let nvars = 3;
    let dim = 2;

    let g_quad = rand_affine(&mut r, 2, dim, nvars, 0.6);
    let h_quad = rand_affine(&mut r, 2, dim, nvars, 0.6);
    let ai: Vec<SymMat> = (0..nvars).map(|_| rand_sym(&mut r, dim, 0.4)).collect();

    let x0 = vec![0.3, -0.2, 0.1];
    let probe = CcdConstraint {
        g: vec![
            MappingTerm::Affine(AffineSymMap::new(SymMat::zeros(dim), ai.clone()).unwrap()),
            MappingTerm::SchurQuad {
                m: g_quad.clone(),
                coeff: 1.0,
                offset: 0,
            },
        ],
        h: vec![MappingTerm::SchurQuad {
            m: h_quad.clone(),
            coeff: 1.0,
            offset: 0,
        }],
        dim,
    };
    let slack = max_eig(&probe.eval(&x0).unwrap());
    let mut a0 = SymMat::zeros(dim);
    for i in 0..dim {
        a0.set(i, i, -slack - 1.5);
    }

    let p = CcdProblem {
        nvars,
        b_obj: SymMat::identity(nvars),
        h_obj: vec![1.0, -2.0, 0.5],
        constraints: vec![CcdConstraint {
            g: vec![
                MappingTerm::Affine(AffineSymMap::new(a0, ai).unwrap()),
                MappingTerm::SchurQuad {
                    m: g_quad,
                    coeff: 1.0,
                    offset: 0,
                },
            ],
            h: vec![MappingTerm::SchurQuad {
                m: h_quad,
                coeff: 1.0,
                offset: 0,
            }],
            dim,
        }],
        omega: vec![],
    };

    let cfg = CcdConfig {
        rho_k: 0.05,
        qk_mode: QkMode::Identity,
        eps_step: 1e-7,
        eps_obj: 1e-9,
        k_max: 40,
        ..CcdConfig::default()
    };
    let (x, trace, status) = ccd_solve(&p, &x0, &cfg).unwrap();
    assert!(
        !trace.records.is_empty(),
        "no accepted steps (status {status:?})"
    );
    let rho_f = p.rho_f().unwrap();
    assert!((rho_f - 1.0).abs() < 1e-12);

    let mut f_prev = trace.f0;
    for rec in &trace.records {
        // monotone within the audit tolerance
        assert!(
            rec.f <= f_prev + 1e-9 * (1.0 + f_prev.abs()),
            "iteration {}: objective rose from {f_prev:.9e} to {:.9e}",
            rec.k,
            rec.f
        );
        // strong-convexity decrease bound, tolerance for subproblem gap
        let bound = 0.5 * rho_f * rec.step_2 * rec.step_2
            + cfg.rho_k * rec.qstep_2 * rec.qstep_2;
        assert!(
            f_prev - rec.f >= bound - 1e-6 * (1.0 + f_prev.abs()),
            "iteration {}: decrease {:.3e} below bound {bound:.3e}",
            rec.k,
            f_prev - rec.f
        );
        // every iterate stays feasible
        assert!(
            rec.worst_eig() <= 1e-7,
            "iteration {}: worst block eigenvalue {:.3e}",
            rec.k,
            rec.worst_eig()
        );
        f_prev = rec.f;
    }

    // the final point is feasible and the residual is small at this
    // stationary point
    assert!(p.feasibility_margin(&x).unwrap() <= 1e-9);
    let r_final = kkt_residual(&p, &x, trace.multipliers.as_ref().unwrap()).unwrap();
    assert!(r_final <= 1e-4, "final residual {r_final:.3e}");
}

#[test]
fn feasibility_component_matches_an_independent_eigensolve() {
    // zero objective and zero multipliers isolate the feasibility part
    let p = CcdProblem {
        b_obj: SymMat::zeros(1),
        h_obj: vec![0.0],
        ..interval_problem()
    };
    let m = Multipliers {
        constraints: vec![SymMat::zeros(1)],
        omega: vec![],
    };
    // x = 3 violates: x² − 2x = 3
    let r = kkt_residual(&p, &[3.0], &m).unwrap();
    let direct = max_eig(&p.constraints[0].eval(&[3.0]).unwrap());
    assert!((r - direct).abs() <= 1e-12);
    assert!((r - 3.0).abs() <= 1e-12);
}

#[test]
fn trace_log_lists_every_iteration() {
    let p = interval_problem();
    let (_, trace, _) = ccd_solve(&p, &[1.0], &CcdConfig::default()).unwrap();
    let log = trace.to_log();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines.len(), trace.records.len() + 1);
    assert!(lines[0].starts_with("start f="));
    for (i, rec) in trace.records.iter().enumerate() {
        assert!(lines[i + 1].starts_with(&format!("k={} ", rec.k)));
        assert!(lines[i + 1].contains("sub_iters="));
    }
}

/// An inverse term on the concave side, end to end: maximize t subject
/// to t ≤ 1/q over 0.5 ≤ q ≤ 2. The tangent of 1/q is steepest toward
/// small q, so the loop walks q onto its floor and t onto 1/q there.
/// The base-set floor also keeps every iterate inside the inverse's
/// domain, which is what the synthesis frontends rely on.
#[test]
fn inverse_term_drives_the_iterates_to_the_analytic_optimum() {
    // variables: q, t
    let mut t_coeff = SymMat::zeros(1);
    t_coeff.set(0, 0, 1.0);
    let g_affine = AffineSymMap::new(SymMat::zeros(1), vec![SymMat::zeros(1), t_coeff]).unwrap();
    let floor = AffineSymMap::new(
        SymMat::from_fn(1, |_, _| 0.5),
        vec![SymMat::from_fn(1, |_, _| -1.0), SymMat::zeros(1)],
    )
    .unwrap();
    let ceiling = AffineSymMap::new(
        SymMat::from_fn(1, |_, _| -2.0),
        vec![SymMat::from_fn(1, |_, _| 1.0), SymMat::zeros(1)],
    )
    .unwrap();
    let p = CcdProblem {
        nvars: 2,
        b_obj: SymMat::zeros(2),
        h_obj: vec![0.0, -1.0],
        constraints: vec![CcdConstraint {
            g: vec![MappingTerm::Affine(g_affine)],
            h: vec![MappingTerm::InverseOf {
                vars: vec![0],
                nq: 1,
                offset: 0,
            }],
            dim: 1,
        }],
        omega: vec![floor, ceiling],
    };
    let (x, trace, _) = ccd_solve(&p, &[1.0, 0.5], &CcdConfig::default()).unwrap();
    assert!((x[0] - 0.5).abs() <= 1e-3, "q = {:.6}", x[0]);
    assert!((x[1] - 2.0).abs() <= 1e-3, "t = {:.6}", x[1]);
    // inner approximation: t never exceeds the true bound 1/q on the way
    for rec in &trace.records {
        assert!(rec.worst_eig() <= 1e-9, "iteration {}", rec.k);
    }
}

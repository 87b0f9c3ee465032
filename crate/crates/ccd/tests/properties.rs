//! Structural properties of the decomposition, linearization, and lifting
//! machinery on randomized instances.

mod common;

use ccd::{
    lift_subproblem, linearize_concave, split_bilinear, sym_len, AffineMat, CcdConfig,
    CcdConstraint, CcdProblem, MappingTerm, QkMode, SplitForm,
};
use common::*;
use matlin::{Mat, SymMat};
use rand::Rng;
use sdp::AffineSymMap;

/// All three difference-of-squares forms reproduce XᵀY + YᵀX exactly.
#[test]
fn three_splits_reconstruct_the_bilinear_product() {
    let mut r = rng(101);
    let forms = [
        SplitForm::SumMinusParts,
        SplitForm::PartsMinusDiff,
        SplitForm::Symmetric,
    ];
    for trial in 0..1000 {
        let rows = r.gen_range(1..=8);
        let cols = r.gen_range(1..=8);
        // most pairs constant, a fifth evaluated through affine maps
        let nvars = if trial % 5 == 0 { r.gen_range(1..=3) } else { 0 };
        let x_map = rand_affine(&mut r, rows, cols, nvars, 2.0);
        let y_map = rand_affine(&mut r, rows, cols, nvars, 2.0);
        let point: Vec<f64> = (0..nvars).map(|_| r.gen_range(-1.0..1.0)).collect();
        let xv = x_map.eval(&point).unwrap();
        let yv = y_map.eval(&point).unwrap();
        let target = xv
            .transpose()
            .matmul(&yv)
            .add(&yv.transpose().matmul(&xv));
        for form in forms {
            let (g, h) = split_bilinear(&x_map, &y_map, form, 0).unwrap();
            let mut acc = SymMat::zeros(cols);
            for t in &g {
                acc.add_assign(&t.eval(&point, cols).unwrap());
            }
            for t in &h {
                acc.axpy(-1.0, &t.eval(&point, cols).unwrap());
            }
            let err = acc.to_mat().sub(&target).norm_max();
            assert!(
                err <= 1e-12,
                "form {form:?} trial {trial}: reconstruction error {err:.3e}"
            );
        }
    }
}

/// Random concave sides: the tangent agrees at the expansion point to
/// 1e-12 and never exceeds the true term at probe points (psd order,
/// eigenvalue slack 1e-9).
#[test]
fn tangent_is_tight_at_base_and_dominated_everywhere() {
    let mut r = rng(202);
    for instance in 0..100 {
        // alternate pure-square, pure-inverse, and mixed concave sides
        let kind = instance % 3;
        let mut h_terms: Vec<MappingTerm> = Vec::new();
        let dim: usize;
        let mut sample_point: Box<dyn FnMut(&mut rand_chacha::ChaCha8Rng) -> Vec<f64>>;

        match kind {
            0 => {
                // squares of affine maps over free variables
                let nvars = r.gen_range(2..=5);
                let cols = r.gen_range(1..=4);
                let rows = r.gen_range(1..=4);
                dim = cols + r.gen_range(0..=2);
                let offset = dim - cols;
                let m = rand_affine(&mut r, rows, cols, nvars, 1.0);
                h_terms.push(MappingTerm::SchurQuad {
                    m,
                    coeff: r.gen_range(0.2..1.5),
                    offset,
                });
                let n = nvars;
                sample_point = Box::new(move |rr| {
                    (0..n).map(|_| rr.gen_range(-1.2..1.2)).collect()
                });
            }
            1 => {
                // inverse of a packed symmetric variable
                let nq = r.gen_range(1..=3);
                dim = nq + r.gen_range(0..=1);
                h_terms.push(MappingTerm::InverseOf {
                    vars: (0..sym_len(nq)).collect(),
                    nq,
                    offset: 0,
                });
                sample_point = Box::new(move |rr| rand_spd_packed(rr, nq));
            }
            _ => {
                // a square and an inverse sharing one block
                let nq = 2;
                let cols = 2;
                dim = 4;
                let nq_vars = sym_len(nq);
                let extra = r.gen_range(1..=3);
                let nvars = nq_vars + extra;
                let mut m = rand_affine(&mut r, 2, cols, nvars, 1.0);
                // decouple the square from the packed variable slice
                for v in 0..nq_vars {
                    *m.coefficient_mut(v) = Mat::zeros(2, cols);
                }
                h_terms.push(MappingTerm::InverseOf {
                    vars: (0..nq_vars).collect(),
                    nq,
                    offset: 0,
                });
                h_terms.push(MappingTerm::SchurQuad {
                    m,
                    coeff: 0.5,
                    offset: 2,
                });
                sample_point = Box::new(move |rr| {
                    let mut x = rand_spd_packed(rr, nq);
                    x.extend((0..extra).map(|_| rr.gen_range(-1.2..1.2)));
                    x
                });
            }
        }

        let xk = sample_point(&mut r);
        let tangent = linearize_concave(&h_terms, &xk, dim).unwrap();

        let eval_h = |x: &[f64]| -> SymMat {
            let mut acc = SymMat::zeros(dim);
            for t in &h_terms {
                acc.add_assign(&t.eval(x, dim).unwrap());
            }
            acc
        };

        let tight = tangent
            .eval(&xk)
            .unwrap()
            .sub(&eval_h(&xk))
            .norm_max();
        assert!(
            tight <= 1e-12,
            "instance {instance}: tangency error {tight:.3e}"
        );

        for probe in 0..100 {
            let x = sample_point(&mut r);
            let gap = eval_h(&x).sub(&tangent.eval(&x).unwrap());
            let lo = min_eig(&gap);
            assert!(
                lo >= -1e-9,
                "instance {instance} probe {probe}: tangent exceeds term by {lo:.3e}"
            );
        }
    }
}

/// Points feasible for the lifted subproblem stay feasible for the
/// original constraints: 500 accepted samples across random instances.
#[test]
fn subproblem_feasible_points_satisfy_original_constraints() {
    let mut r = rng(303);
    let cfg = CcdConfig {
        rho_k: 0.0,
        qk_mode: QkMode::None,
        ..CcdConfig::default()
    };
    let mut accepted_total = 0usize;
    for instance in 0..20 {
        let nvars = r.gen_range(2..=4);
        let dim = r.gen_range(2..=4);
        let rows = r.gen_range(1..=3);

        // convex side: affine block plus a square; concave side: a square
        let g_quad = rand_affine(&mut r, rows, dim, nvars, 0.7);
        let h_quad = rand_affine(&mut r, rows, dim, nvars, 0.7);
        let a0 = rand_sym(&mut r, dim, 0.5);
        let ai: Vec<SymMat> = (0..nvars).map(|_| rand_sym(&mut r, dim, 0.5)).collect();

        let x0: Vec<f64> = (0..nvars).map(|_| r.gen_range(-0.5..0.5)).collect();

        let mut constraint = CcdConstraint {
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
        };
        let p_probe = CcdProblem {
            nvars,
            b_obj: SymMat::zeros(nvars),
            h_obj: vec![0.0; nvars],
            constraints: vec![constraint.clone()],
            omega: vec![],
        };
        // recenter the affine constant so x0 is strictly inside
        let slack = max_eig(&p_probe.constraints[0].eval(&x0).unwrap());
        if let MappingTerm::Affine(a) = &mut constraint.g[0] {
            let mut shifted = a.constant().clone();
            for i in 0..dim {
                shifted.set(i, i, shifted.get(i, i) - slack - 1.0);
            }
            *a = AffineSymMap::new(
                shifted,
                (0..nvars).map(|v| a.coefficient(v).clone()).collect(),
            )
            .unwrap();
        }
        let p = CcdProblem {
            constraints: vec![constraint],
            ..p_probe
        };
        assert!(p.feasibility_margin(&x0).unwrap() <= -1.0 + 1e-9);

        let sub = lift_subproblem(&p, &x0, &cfg).unwrap();
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < 25 && attempts < 20000 {
            attempts += 1;
            let z: Vec<f64> = x0
                .iter()
                .map(|&v| v + r.gen_range(-1.5..1.5))
                .collect();
            let lifted_ok = sub
                .blocks
                .iter()
                .all(|b| max_eig(&b.eval(&z).unwrap()) <= 0.0);
            if !lifted_ok {
                continue;
            }
            accepted += 1;
            let margin = p.feasibility_margin(&z).unwrap();
            assert!(
                margin <= 1e-7,
                "instance {instance}: lifted-feasible point violates original by {margin:.3e}"
            );
        }
        assert!(
            accepted == 25,
            "instance {instance}: only {accepted} feasible samples in {attempts} attempts"
        );
        accepted_total += accepted;
    }
    assert_eq!(accepted_total, 500);
}

/// Directional derivatives of square and inverse terms match central
/// finite differences.
#[test]
fn term_derivatives_match_finite_differences() {
    let mut r = rng(404);
    for trial in 0..60 {
        let nvars = r.gen_range(2..=5);
        let rows = r.gen_range(1..=4);
        let cols = r.gen_range(1..=4);
        let dim = cols;
        let m = rand_affine(&mut r, rows, cols, nvars, 1.0);
        let term = MappingTerm::SchurQuad {
            m,
            coeff: r.gen_range(0.3..1.2),
            offset: 0,
        };
        let x: Vec<f64> = (0..nvars).map(|_| r.gen_range(-1.0..1.0)).collect();
        let d: Vec<f64> = (0..nvars).map(|_| r.gen_range(-1.0..1.0)).collect();
        let got = term.derivative_apply(&x, &d, dim).unwrap();

        let t = 1e-5;
        let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - t * b).collect();
        let fp = term.eval(&xp, dim).unwrap();
        let fm = term.eval(&xm, dim).unwrap();
        let fd = fp.sub(&fm).scale(0.5 / t);
        let err = got.sub(&fd).norm_max();
        assert!(
            err <= 1e-6,
            "square trial {trial}: derivative error {err:.3e}"
        );
    }

    for trial in 0..40 {
        let nq = r.gen_range(1..=3);
        let nvars = sym_len(nq);
        let term = MappingTerm::InverseOf {
            vars: (0..nvars).collect(),
            nq,
            offset: 0,
        };
        let x = rand_spd_packed(&mut r, nq);
        let d: Vec<f64> = (0..nvars).map(|_| r.gen_range(-0.3..0.3)).collect();
        let got = term.derivative_apply(&x, &d, nq).unwrap();

        let t = 1e-5;
        let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - t * b).collect();
        let fp = term.eval(&xp, nq).unwrap();
        let fm = term.eval(&xm, nq).unwrap();
        let fd = fp.sub(&fm).scale(0.5 / t);
        let err = got.sub(&fd).norm_max();
        assert!(
            err <= 1e-6,
            "inverse trial {trial}: derivative error {err:.3e}"
        );
    }
}

/// A block with two squares on the convex side lifts into the expected
/// four-block arrangement: the hand-assembled reference below places the
/// linearized corner first, then one identity row per square factor, and
/// the remaining affine corner last. The lift orders rows differently
/// (original block first, factor rows after), so the comparison goes
/// through an explicit index permutation and a sign flip on the factor
/// rows, which together are a congruence and preserve semidefiniteness.
#[test]
fn two_squares_lift_into_the_four_block_arrangement() {
    let mut r = rng(505);
    let n = 3;
    // variable layout: packed symmetric p (6), full gain f (9), then
    // three scalars: level, margin, curvature
    let np = sym_len(n);
    let nf = n * n;
    let nvars = np + nf + 3;
    let (i_beta, i_mu, i_omega) = (np + nf, np + nf + 1, np + nf + 2);
    let eps = 0.1;

    let a_const = rand_mat(&mut r, n, n, 1.0);

    // closed-loop factor: A + F + β·I as a general affine map
    let mut bf = AffineMat::zeros(n, n, nvars);
    *bf.constant_part_mut() = a_const.clone();
    for rr in 0..n {
        for cc in 0..n {
            let v = np + rr * n + cc;
            bf.coefficient_mut(v)[(rr, cc)] = 1.0;
        }
    }
    for d in 0..n {
        bf.coefficient_mut(i_beta)[(d, d)] = 1.0;
    }

    // the symmetric variable as a general affine map
    let mut pmap = AffineMat::zeros(n, n, nvars);
    for i in 0..n {
        for j in 0..=i {
            let v = ccd::sym_index(i, j);
            pmap.coefficient_mut(v)[(i, j)] = 1.0;
            if i != j {
                pmap.coefficient_mut(v)[(j, i)] = 1.0;
            }
        }
    }

    // affine part of the convex side: [[(μ−ω)I, εP],[εP, ωI]]
    let dim = 2 * n;
    let mut ai = vec![SymMat::zeros(dim); nvars];
    for d in 0..n {
        ai[i_mu].set(d, d, 1.0);
        ai[i_omega].set(d, d, -1.0);
        ai[i_omega].set(n + d, n + d, 1.0);
    }
    for i in 0..n {
        for j in 0..=i {
            let v = ccd::sym_index(i, j);
            ai[v].set(i, n + j, eps);
            if i != j {
                ai[v].set(j, n + i, eps);
            }
        }
    }
    let g_affine = AffineSymMap::new(SymMat::zeros(dim), ai).unwrap();

    let constraint = CcdConstraint {
        g: vec![
            MappingTerm::Affine(g_affine),
            MappingTerm::SchurQuad {
                m: bf.clone(),
                coeff: 1.0,
                offset: 0,
            },
            MappingTerm::SchurQuad {
                m: pmap.clone(),
                coeff: 1.0,
                offset: 0,
            },
        ],
        h: vec![MappingTerm::SchurQuad {
            m: bf.sub(&pmap).unwrap(),
            coeff: 1.0,
            offset: 0,
        }],
        dim,
    };
    let p = CcdProblem {
        nvars,
        b_obj: SymMat::zeros(nvars),
        h_obj: vec![0.0; nvars],
        constraints: vec![constraint],
        omega: vec![],
    };

    let xk: Vec<f64> = (0..nvars).map(|_| r.gen_range(-0.8..0.8)).collect();
    let cfg = CcdConfig {
        rho_k: 0.0,
        qk_mode: QkMode::None,
        ..CcdConfig::default()
    };
    let sub = lift_subproblem(&p, &xk, &cfg).unwrap();
    assert_eq!(sub.blocks.len(), 1);
    assert_eq!(sub.blocks[0].dim(), 4 * n);

    let dk = bf.sub(&pmap).unwrap().eval(&xk).unwrap();

    for _ in 0..3 {
        let x: Vec<f64> = (0..nvars).map(|_| r.gen_range(-0.8..0.8)).collect();
        let bfx = bf.eval(&x).unwrap();
        let px = pmap.eval(&x).unwrap();
        let dx = bfx.sub(&px);
        // tangent of (B−P)ᵀ(B−P) at xk, evaluated at x
        let hk = dx
            .transpose()
            .matmul(&dk)
            .add(&dk.transpose().matmul(&dx))
            .sub(&dk.transpose().matmul(&dk));
        let (mu, om) = (x[i_mu], x[i_omega]);

        // reference arrangement, written as the psd side of the inequality
        let mut reference = Mat::zeros(4 * n, 4 * n);
        let top = hk.add(&Mat::identity(n).scale(om - mu));
        reference.set_block(0, 0, &top);
        reference.set_block(0, n, &bfx.transpose());
        reference.set_block(n, 0, &bfx);
        reference.set_block(0, 2 * n, &px);
        reference.set_block(2 * n, 0, &px.transpose());
        reference.set_block(0, 3 * n, &px.scale(-eps));
        reference.set_block(3 * n, 0, &px.transpose().scale(-eps));
        reference.set_block(n, n, &Mat::identity(n));
        reference.set_block(2 * n, 2 * n, &Mat::identity(n));
        reference.set_block(3 * n, 3 * n, &Mat::identity(n).scale(-om));

        // the lift, negated into the same psd orientation
        let lifted = sub.blocks[0].eval(&x).unwrap().to_mat().scale(-1.0);

        // reference group g lives at lift rows map[g], factor rows flipped
        let group = |idx: usize| -> (usize, f64) {
            match idx / n {
                0 => (idx, 1.0),
                1 => (2 * n + idx % n, -1.0),
                2 => (3 * n + idx % n, -1.0),
                _ => (n + idx % n, 1.0),
            }
        };
        for rr in 0..4 * n {
            for cc in 0..4 * n {
                let (lr, sr) = group(rr);
                let (lc, sc) = group(cc);
                let want = reference[(rr, cc)];
                let got = sr * sc * lifted[(lr, lc)];
                assert!(
                    (want - got).abs() <= 1e-12,
                    "entry ({rr},{cc}): reference {want:.6e}, lift {got:.6e}"
                );
            }
        }
    }
}

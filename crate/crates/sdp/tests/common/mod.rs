#![allow(dead_code)]

use matlin::{sym_eig, Mat, SymMat};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp::{AffineSymMap, QsdpProblem};

pub fn rand_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymMat {
    SymMat::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn max_eig(s: &SymMat) -> f64 {
    let (vals, _) = sym_eig(s).unwrap();
    vals[vals.len() - 1]
}

/// Random QSDP with a strongly convex objective (so the optimum exists and
/// is unique) and constant terms shifted so z = 0 is strictly feasible with
/// margin 0.5 in every block.
pub fn random_feasible_qsdp(seed: u64) -> QsdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nvars = rng.gen_range(1..=6);
    let nblocks = rng.gen_range(1..=3);

    let r = Mat::from_fn(nvars, nvars, |_, _| rng.gen_range(-1.0..1.0));
    let mut b_quad = r.transpose().matmul(&r).symmetrize();
    for i in 0..nvars {
        let v = b_quad.get(i, i);
        b_quad.set(i, i, v + 0.1);
    }
    let h = rand_vec(&mut rng, nvars, 2.0);

    let mut blocks = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let d = rng.gen_range(1..=4);
        let ai: Vec<SymMat> = (0..nvars).map(|_| rand_sym(&mut rng, d, 1.0)).collect();
        let mut a0 = rand_sym(&mut rng, d, 1.0);
        let shift = max_eig(&a0) + 0.5;
        for i in 0..d {
            let v = a0.get(i, i);
            a0.set(i, i, v - shift);
        }
        blocks.push(AffineSymMap::new(a0, ai).unwrap());
    }

    QsdpProblem { nvars, b_quad, h, blocks }
}

pub fn feasible_within(p: &QsdpProblem, z: &[f64], tol: f64) -> bool {
    p.blocks.iter().all(|b| max_eig(&b.eval(z).unwrap()) <= tol)
}

/// Derivative-free refinement: coordinate pattern search with feasibility
/// rejection, plus random probe directions so boundary-constrained optima
/// are not missed by the axis pattern. Returns the best objective found.
pub fn pattern_search_refine(p: &QsdpProblem, start: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = p.nvars;
    let feas_tol = 1e-7;
    assert!(feasible_within(p, start, feas_tol), "refinement seed must be feasible");
    let mut z = start.to_vec();
    let mut f = p.objective(&z);

    let mut step = 1.0;
    while step > 1e-7 {
        let mut improved_at_this_step = true;
        let mut sweeps = 0;
        while improved_at_this_step && sweeps < 200 {
            improved_at_this_step = false;
            sweeps += 1;

            let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * n + 2 * n);
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                dirs.push(e.clone());
                e[i] = -1.0;
                dirs.push(e);
            }
            for _ in 0..2 * n {
                let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let nrm = d.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                dirs.push(d.iter().map(|x| x / nrm).collect());
            }

            for d in &dirs {
                let cand: Vec<f64> =
                    z.iter().zip(d).map(|(a, di)| a + step * di).collect();
                let fc = p.objective(&cand);
                if fc < f - 1e-13 * (1.0 + f.abs()) && feasible_within(p, &cand, feas_tol) {
                    z = cand;
                    f = fc;
                    improved_at_this_step = true;
                }
            }
        }
        step *= 0.5;
    }
    f
}

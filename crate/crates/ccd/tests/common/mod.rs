use ccd::AffineMat;
use matlin::{Mat, SymMat};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

pub fn rand_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymMat {
    SymMat::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

pub fn rand_affine(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    nvars: usize,
    scale: f64,
) -> AffineMat {
    let m0 = rand_mat(rng, rows, cols, scale);
    let mi = (0..nvars).map(|_| rand_mat(rng, rows, cols, scale)).collect();
    AffineMat::new(m0, mi).unwrap()
}

/// Packed lower triangle (row-major) of a well-conditioned SPD matrix.
pub fn rand_spd_packed(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let r = rand_mat(rng, n, n, 0.8);
    let spd = r.matmul(&r.transpose());
    let mut packed = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            let bump = if i == j { 0.4 } else { 0.0 };
            packed.push(spd[(i, j)] + bump);
        }
    }
    packed
}

pub fn max_eig(s: &SymMat) -> f64 {
    let (eigs, _) = matlin::sym_eig(s).unwrap();
    *eigs.last().unwrap()
}

pub fn min_eig(s: &SymMat) -> f64 {
    let (eigs, _) = matlin::sym_eig(s).unwrap();
    eigs[0]
}

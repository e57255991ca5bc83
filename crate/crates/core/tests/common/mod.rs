#![allow(dead_code)]

use adiawalk::integrators::Pair;
use adiawalk::linalg::{Hermitian, Matrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(seed: u64, n: usize) -> Hermitian {
    Hermitian::random(&mut rng(seed), n)
}

pub fn random_pair(seed: u64, n: usize) -> Pair {
    let mut r = rng(seed);
    let h0 = Hermitian::random(&mut r, n);
    let h1 = Hermitian::random(&mut r, n);
    Pair::new(h0, h1).unwrap()
}

/// Random unitary: exponential of a random Hermitian matrix.
pub fn random_unitary(seed: u64, n: usize) -> Matrix {
    let h = random_hermitian(seed, n);
    adiawalk::linalg::expm_i_hermitian(&h, 3.0).unwrap().into_matrix()
}

pub fn random_state(seed: u64, n: usize) -> Vec<C64> {
    use rand::Rng;
    let mut r = rng(seed);
    let v: Vec<C64> = (0..n).map(|_| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    let norm = adiawalk::linalg::vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

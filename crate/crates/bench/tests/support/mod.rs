#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vector(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

pub fn uniform_matrix(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(lo..hi))
}

const FD_STEP: f64 = 1e-6;

pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |j, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += FD_STEP;
        xm[j] -= FD_STEP;
        (f(&xp) - f(&xm)) / (2.0 * FD_STEP)
    })
}

pub fn fd_jacobian(g: impl Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(x.len(), x.len());
    for j in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += FD_STEP;
        xm[j] -= FD_STEP;
        jac.set_column(j, &((g(&xp) - g(&xm)) / (2.0 * FD_STEP)));
    }
    jac
}

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

/// Random orthogonal matrix from the QR factor of a uniform matrix.
pub fn orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    uniform_matrix(rng, n, -1.0, 1.0).qr().q()
}

/// `Q diag(λ) Qᵀ`, symmetrized.
pub fn with_spectrum(q: &DMatrix<f64>, eigenvalues: &[f64]) -> DMatrix<f64> {
    let m = q * DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// `Σ (a_k)` over `order`, done in a plain loop.
pub fn brute_mean(vectors: &[DVector<f64>]) -> DVector<f64> {
    let mut sum = DVector::zeros(vectors[0].len());
    for v in vectors {
        for i in 0..v.len() {
            sum[i] += v[i];
        }
    }
    sum / vectors.len() as f64
}

/// Central differences of a scalar function.
pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_fn(x.len(), |j, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    })
}

/// Central differences of a vector function, column `j` = `∂g/∂x_j`.
pub fn fd_jacobian(
    g: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    h: f64,
) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        jac.set_column(j, &((g(&xp) - g(&xm)) / (2.0 * h)));
    }
    jac
}

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::problem::{FiniteSumProblem, KnownConstants, ProblemError};

/// `f_i(x) = ½ xᵀA_i x + ¼‖x‖⁴` with `(1/d) Σ A_i = diag(1, −1, 0.7, 0.8, …)`.
///
/// The origin is a strict saddle of `f`: `∇f(0) = 0` and `λ_min(∇²f(0)) = −1`.
/// Individual `A_i` differ by a diagonal shift and an off-diagonal coupling in
/// the leading 2×2 block; both perturbations average to zero.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    matrices: Vec<DMatrix<f64>>,
    mean: DMatrix<f64>,
}

impl SaddleProblem {
    pub fn new(n: usize, d: usize) -> Result<Self, ProblemError> {
        if n < 2 || d < 2 {
            return Err(ProblemError::InvalidConstruction(format!(
                "saddle problem needs n >= 2 and d >= 2 (got n = {n}, d = {d})"
            )));
        }
        let base = DVector::from_fn(n, |j, _| match j {
            0 => 1.0,
            1 => -1.0,
            _ => 0.5 + 0.1 * j as f64,
        });
        let matrices: Vec<DMatrix<f64>> = (0..d)
            .map(|i| {
                let t = (2 * (i + 1)) as f64 - d as f64 - 1.0;
                let shift = 0.5 * t / d as f64;
                let coupling = t / d as f64;
                let mut a = DMatrix::from_diagonal(&base);
                for j in 0..n {
                    a[(j, j)] += shift;
                }
                a[(0, 1)] += coupling;
                a[(1, 0)] += coupling;
                a
            })
            .collect();
        let mut mean = DMatrix::zeros(n, n);
        for a in &matrices {
            mean += a;
        }
        mean /= d as f64;
        Ok(Self { matrices, mean })
    }

    /// `(1/d) Σ A_i`, the Hessian of `f` at the origin.
    pub fn mean_matrix(&self) -> &DMatrix<f64> {
        &self.mean
    }
}

impl FiniteSumProblem for SaddleProblem {
    fn name(&self) -> &str {
        "saddle"
    }

    fn dim(&self) -> usize {
        self.mean.nrows()
    }

    fn num_components(&self) -> usize {
        self.matrices.len()
    }

    fn component_value(&self, i: usize, x: &DVector<f64>) -> f64 {
        let r2 = x.norm_squared();
        0.5 * x.dot(&(&self.matrices[i] * x)) + 0.25 * r2 * r2
    }

    fn component_gradient(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        &self.matrices[i] * x + x * x.norm_squared()
    }

    fn component_hessian(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        &self.matrices[i] + DMatrix::identity(n, n) * x.norm_squared() + x * x.transpose() * 2.0
    }

    /// Constants valid on the ball of radius `R = R_L + reach`, where `R_L`
    /// bounds the sublevel set at `x0`: `‖∇²f_G‖ ≤ max_i ‖A_i‖ + 3R²` and the
    /// quartic's third derivative is bounded by `6R`.
    fn known_constants(&self, x0: &DVector<f64>, reach: f64) -> Option<KnownConstants> {
        let lambda = linalg::min_eigenvalue(&self.mean) - 1e-12;
        let f0 = {
            let r2 = x0.norm_squared();
            0.5 * x0.dot(&(&self.mean * x0)) + 0.25 * r2 * r2
        };
        let f_low = if lambda < 0.0 {
            -0.25 * lambda * lambda
        } else {
            0.0
        };
        // ½λu + ¼u² ≤ f0 with u = ‖x‖²
        let f0_slack = f0 + 1e-12 * (1.0 + f0.abs());
        let u_max = -lambda + (lambda * lambda + 4.0 * f0_slack).max(0.0).sqrt();
        let sublevel_radius = u_max.max(0.0).sqrt();
        let radius = sublevel_radius + reach;
        let a_norm = self
            .matrices
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max);
        Some(KnownConstants {
            lipschitz_gradient: a_norm + 3.0 * radius * radius,
            lipschitz_hessian: 6.0 * radius,
            d0: sublevel_radius,
            f_low,
        })
    }
}

//! Approximate minimization of the quadratic trust-region model
//! `m(d) = f0 + ⟨g, d⟩ + ½⟨Bd, d⟩` over `‖d‖ ≤ Δ`, and the sufficient-decrease
//! tests accepted steps must pass.

use std::cell::OnceCell;

use log::debug;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{self, Cholesky, SymmetricEigen, CURVATURE_FLOOR};

/// Default coefficient of the curvature term in the second-order decrease
/// test; an eigen-step of length `Δ` only guarantees `½(−λ_min)Δ²`.
pub const DEFAULT_EIGEN_COEFFICIENT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubproblemError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model gradient is zero")]
    ZeroGradient,
    #[error("model Hessian is not positive definite")]
    NotPositiveDefinite,
    #[error("model Hessian has no negative curvature")]
    NoNegativeCurvature,
    #[error("model has zero gradient and no negative curvature")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Cauchy,
    Dogleg,
    Eigen,
}

#[derive(Debug, Clone)]
pub struct Step {
    pub direction: DVector<f64>,
    pub kind: StepKind,
    pub decrease: f64,
    /// Whether the Cholesky factorization of `B` succeeded, when the solver
    /// attempted it.
    pub factorized: Option<bool>,
}

/// Trust-region model at the current iterate.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    gradient: DVector<f64>,
    hessian: DMatrix<f64>,
    delta: f64,
    f0: f64,
    spectrum: OnceCell<SymmetricEigen>,
}

impl QuadraticModel {
    pub fn new(
        gradient: DVector<f64>,
        hessian: DMatrix<f64>,
        delta: f64,
        f0: f64,
    ) -> Result<Self, SubproblemError> {
        let n = gradient.len();
        if n == 0 || hessian.nrows() != n || hessian.ncols() != n {
            return Err(SubproblemError::InvalidModel(format!(
                "gradient of length {n} with {}×{} Hessian",
                hessian.nrows(),
                hessian.ncols()
            )));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(SubproblemError::InvalidModel(format!(
                "radius {delta} not positive"
            )));
        }
        let scale = 1.0 + hessian.amax();
        if linalg::asymmetry(&hessian) > 1e-12 * scale {
            return Err(SubproblemError::InvalidModel(
                "Hessian not symmetric".into(),
            ));
        }
        Ok(Self {
            gradient,
            hessian,
            delta,
            f0,
            spectrum: OnceCell::new(),
        })
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.gradient
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// Eigendecomposition of `B`, computed once on first use.
    pub fn spectrum(&self) -> &SymmetricEigen {
        self.spectrum
            .get_or_init(|| linalg::symmetric_eigen(&self.hessian))
    }

    /// `λ_min(B)`, with values in `[−1e-9, 0)` reported as zero.
    pub fn min_curvature(&self) -> f64 {
        let lambda = self.spectrum().min();
        if lambda < -CURVATURE_FLOOR {
            lambda
        } else {
            lambda.max(0.0)
        }
    }

    pub fn value(&self, d: &DVector<f64>) -> f64 {
        self.f0 + self.gradient.dot(d) + 0.5 * d.dot(&(&self.hessian * d))
    }

    /// `m(0) − m(d) = −⟨g, d⟩ − ½⟨Bd, d⟩`.
    pub fn model_decrease(&self, d: &DVector<f64>) -> f64 {
        -self.gradient.dot(d) - 0.5 * d.dot(&(&self.hessian * d))
    }

    /// Slack for a decrease test against `bound`. The relative part matters
    /// when the bound is attained exactly, as for the eigen-step with `g = 0`.
    fn tolerance(&self, bound: f64) -> f64 {
        1e-12 * (1.0 + self.f0.abs() + bound.abs())
    }

    fn cauchy_bound(&self, b_norm: f64) -> f64 {
        let g = self.gradient.norm();
        let reach = if b_norm > 0.0 {
            self.delta.min(g / b_norm)
        } else {
            self.delta
        };
        0.5 * g * reach
    }

    /// Minimizer of the model along `−g` inside the region.
    pub fn cauchy_point(&self) -> Result<DVector<f64>, SubproblemError> {
        let g_norm = self.gradient.norm();
        if g_norm == 0.0 {
            return Err(SubproblemError::ZeroGradient);
        }
        let gbg = self.gradient.dot(&(&self.hessian * &self.gradient));
        let to_boundary = self.delta / g_norm;
        let t = if gbg <= 0.0 {
            to_boundary
        } else {
            (g_norm * g_norm / gbg).min(to_boundary)
        };
        Ok(&self.gradient * -t)
    }

    /// Powell's dogleg path from the unconstrained Cauchy point to the Newton
    /// point `−B⁻¹g`, cut at the boundary. Requires `B` positive definite.
    pub fn dogleg(&self) -> Result<DVector<f64>, SubproblemError> {
        let g_norm = self.gradient.norm();
        if g_norm == 0.0 {
            return Err(SubproblemError::ZeroGradient);
        }
        let chol = Cholesky::new(&self.hessian).ok_or(SubproblemError::NotPositiveDefinite)?;
        let newton = -chol.solve(&self.gradient);
        if !newton.iter().all(|v| v.is_finite()) {
            return Err(SubproblemError::NotPositiveDefinite);
        }
        if newton.norm() <= self.delta {
            return Ok(newton);
        }
        let gbg = self.gradient.dot(&(&self.hessian * &self.gradient));
        let steepest = &self.gradient * -(g_norm * g_norm / gbg);
        if steepest.norm() >= self.delta {
            return Ok(&self.gradient * -(self.delta / g_norm));
        }
        // ‖p_u + τ(p_b − p_u)‖ = Δ for τ ∈ (0, 1)
        let leg = &newton - &steepest;
        let a = leg.norm_squared();
        let b = 2.0 * steepest.dot(&leg);
        let c = steepest.norm_squared() - self.delta * self.delta;
        let root = (b * b - 4.0 * a * c).max(0.0).sqrt();
        let tau = if b >= 0.0 {
            2.0 * c / (-b - root)
        } else {
            (-b + root) / (2.0 * a)
        };
        Ok(steepest + leg * tau.clamp(0.0, 1.0))
    }

    /// Step of length `Δ` along a unit eigenvector of `λ_min(B) < 0`, signed
    /// so that `⟨g, d⟩ ≤ 0`.
    pub fn eigen_step(&self) -> Result<DVector<f64>, SubproblemError> {
        if self.min_curvature() >= 0.0 {
            return Err(SubproblemError::NoNegativeCurvature);
        }
        let v = self.spectrum().min_vector();
        let mut d = &v * (self.delta / v.norm());
        if self.gradient.dot(&d) > 0.0 {
            d = -d;
        }
        Ok(d)
    }

    /// `m(0) − m(d) ≥ c := ½‖g‖ min{Δ, ‖g‖/‖B‖}` up to `1e-12·(1 + |f0| + c)`.
    pub fn verify_first_order(&self, d: &DVector<f64>) -> bool {
        let decrease = self.model_decrease(d);
        let g_norm = self.gradient.norm();
        if g_norm == 0.0 {
            return decrease >= -self.tolerance(0.0);
        }
        let passes = |bound: f64| decrease >= bound - self.tolerance(bound);
        // The bound only weakens as ‖B‖ grows, so passing with a lower bound
        // on ‖B‖ settles the test without an eigensolve.
        let lower = (&self.hessian * &self.gradient).norm() / g_norm;
        passes(self.cauchy_bound(lower))
            || passes(self.cauchy_bound(self.spectrum().spectral_norm()))
    }

    /// `m(0) − m(d) ≥ max{½‖g‖ min{Δ, ‖g‖/‖B‖}, κ(−λ_min(B))₊Δ²}` up to the
    /// same tolerance.
    pub fn verify_second_order(&self, d: &DVector<f64>, kappa: f64) -> bool {
        let decrease = self.model_decrease(d);
        let curvature = kappa * (-self.min_curvature()) * self.delta * self.delta;
        let cauchy = if self.gradient.norm() == 0.0 {
            0.0
        } else {
            self.cauchy_bound(self.spectrum().spectral_norm())
        };
        let bound = cauchy.max(curvature);
        decrease >= bound - self.tolerance(bound)
    }

    /// Dogleg step, or the Cauchy point when `B` is not positive definite or
    /// the dogleg step loses to it numerically.
    pub fn solve_first_order(&self) -> Result<Step, SubproblemError> {
        let cauchy = self.cauchy_point()?;
        let cauchy_decrease = self.model_decrease(&cauchy);
        let dogleg = self.dogleg();
        let factorized = Some(dogleg.is_ok());
        match dogleg {
            Ok(d) => {
                let decrease = self.model_decrease(&d);
                if decrease >= cauchy_decrease {
                    return Ok(Step {
                        direction: d,
                        kind: StepKind::Dogleg,
                        decrease,
                        factorized,
                    });
                }
                debug!("dogleg decrease {decrease:e} below Cauchy decrease {cauchy_decrease:e}");
            }
            Err(e) => debug!("dogleg unavailable ({e}); using Cauchy point"),
        }
        Ok(Step {
            direction: cauchy,
            kind: StepKind::Cauchy,
            decrease: cauchy_decrease,
            factorized,
        })
    }

    /// Best of the Cauchy point, the eigen-step and the dogleg step, by model
    /// decrease.
    pub fn solve_second_order(&self) -> Result<Step, SubproblemError> {
        let mut candidates: Vec<(StepKind, DVector<f64>)> = Vec::with_capacity(3);
        if self.gradient.norm() > 0.0 {
            if self.min_curvature() > 0.0 {
                if let Ok(d) = self.dogleg() {
                    candidates.push((StepKind::Dogleg, d));
                }
            }
            candidates.push((StepKind::Cauchy, self.cauchy_point()?));
        }
        if self.min_curvature() < 0.0 {
            candidates.push((StepKind::Eigen, self.eigen_step()?));
        }
        let mut best: Option<Step> = None;
        for (kind, direction) in candidates {
            let decrease = self.model_decrease(&direction);
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                best = Some(Step {
                    direction,
                    kind,
                    decrease,
                    factorized: None,
                });
            }
        }
        best.ok_or(SubproblemError::Degenerate)
    }
}

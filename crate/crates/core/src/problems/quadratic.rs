use nalgebra::{DMatrix, DVector};

use crate::problem::{FiniteSumProblem, KnownConstants, ProblemError};

/// `f_i(x) = ½‖x − c_i‖²`. Every sub-sampled Hessian is the identity, so
/// `L_g = 1`, `L_H = 0`, and `f` is minimized at the centroid of the centers.
#[derive(Debug, Clone)]
pub struct QuadraticOracle {
    centers: Vec<DVector<f64>>,
    centroid: DVector<f64>,
    spread: f64,
}

impl QuadraticOracle {
    pub fn new(centers: Vec<DVector<f64>>) -> Result<Self, ProblemError> {
        let first = centers
            .first()
            .ok_or_else(|| ProblemError::InvalidConstruction("no centers".into()))?;
        let n = first.len();
        if n == 0 {
            return Err(ProblemError::InvalidConstruction(
                "centers must be nonempty vectors".into(),
            ));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != n) {
            return Err(ProblemError::DimensionMismatch {
                expected: n,
                found: c.len(),
            });
        }
        let mut centroid = DVector::zeros(n);
        for c in &centers {
            centroid += c;
        }
        centroid /= centers.len() as f64;
        let spread = centers
            .iter()
            .map(|c| (c - &centroid).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            centers,
            centroid,
            spread,
        })
    }

    /// Checked constructor: `d` centers, each in `R^n`.
    pub fn with_shape(
        n: usize,
        d: usize,
        centers: Vec<DVector<f64>>,
    ) -> Result<Self, ProblemError> {
        if centers.len() != d {
            return Err(ProblemError::InvalidConstruction(format!(
                "expected {d} centers, got {}",
                centers.len()
            )));
        }
        let p = Self::new(centers)?;
        if p.centroid.len() != n {
            return Err(ProblemError::DimensionMismatch {
                expected: n,
                found: p.centroid.len(),
            });
        }
        Ok(p)
    }

    /// The minimizer of `f`.
    pub fn centroid(&self) -> &DVector<f64> {
        &self.centroid
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    /// `max_i ‖c_i − c̄‖`.
    pub fn spread(&self) -> f64 {
        self.spread
    }

    /// `f(c̄) = (1/d) Σ ½‖c̄ − c_i‖²`.
    pub fn minimum_value(&self) -> f64 {
        let sum = self.centers.iter().fold(0.0, |acc, c| {
            acc + 0.5 * (&self.centroid - c).norm_squared()
        });
        sum / self.centers.len() as f64
    }
}

impl FiniteSumProblem for QuadraticOracle {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.centroid.len()
    }

    fn num_components(&self) -> usize {
        self.centers.len()
    }

    fn component_value(&self, i: usize, x: &DVector<f64>) -> f64 {
        0.5 * (x - &self.centers[i]).norm_squared()
    }

    fn component_gradient(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        x - &self.centers[i]
    }

    fn component_hessian(&self, _i: usize, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    /// `f(x) = ½‖x − c̄‖² + f(c̄)`, so the sublevel set at `x0` is the ball
    /// of radius `‖x0 − c̄‖` about `c̄`, and the supremum defining `D_0` is
    /// `‖x0 − c̄‖ + max_i ‖c_i − c̄‖` in closed form.
    fn known_constants(&self, x0: &DVector<f64>, _reach: f64) -> Option<KnownConstants> {
        Some(KnownConstants {
            lipschitz_gradient: 1.0,
            lipschitz_hessian: 0.0,
            d0: (x0 - &self.centroid).norm() + self.spread,
            f_low: self.minimum_value(),
        })
    }
}

use nalgebra::{DMatrix, DVector};

use crate::problem::FiniteSumProblem;

/// Trigonometric least-squares sum on `R^d` with `d` components:
///
/// `f_i(x) = (d − Σ_j cos x_j + i(1 − cos x_i) − sin x_i)²`, `i = 1..d`
/// (one-based in the formula, zero-based in the API).
///
/// Its global minimum `f = 0` is attained at the origin.
#[derive(Debug, Clone)]
pub struct TrigProblem {
    d: usize,
}

/// Per-point quantities shared by every component.
struct TrigPoint {
    cos_sum: f64,
    sin: Vec<f64>,
    cos: Vec<f64>,
}

impl TrigPoint {
    fn new(x: &DVector<f64>) -> Self {
        let sin: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let cos: Vec<f64> = x.iter().map(|v| v.cos()).collect();
        let cos_sum = cos.iter().fold(0.0, |acc, c| acc + c);
        Self { cos_sum, sin, cos }
    }
}

impl TrigProblem {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "trig problem needs d >= 1");
        Self { d }
    }

    fn residual(&self, p: &TrigPoint, i: usize) -> f64 {
        let w = (i + 1) as f64;
        self.d as f64 - p.cos_sum + w * (1.0 - p.cos[i]) - p.sin[i]
    }

    fn residual_gradient(&self, p: &TrigPoint, i: usize) -> DVector<f64> {
        let w = (i + 1) as f64;
        let mut dr = DVector::from_column_slice(&p.sin);
        dr[i] += w * p.sin[i] - p.cos[i];
        dr
    }

    fn gradient_at(&self, p: &TrigPoint, i: usize) -> DVector<f64> {
        let r = self.residual(p, i);
        self.residual_gradient(p, i) * (2.0 * r)
    }
}

impl FiniteSumProblem for TrigProblem {
    fn name(&self) -> &str {
        "trig"
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn num_components(&self) -> usize {
        self.d
    }

    fn component_value(&self, i: usize, x: &DVector<f64>) -> f64 {
        let r = self.residual(&TrigPoint::new(x), i);
        r * r
    }

    fn component_gradient(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        self.gradient_at(&TrigPoint::new(x), i)
    }

    fn component_hessian(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
        let p = TrigPoint::new(x);
        let n = self.d;
        let r = self.residual(&p, i);
        let dr = self.residual_gradient(&p, i);
        let w = (i + 1) as f64;
        let mut h = &dr * dr.transpose() * 2.0;
        for j in 0..n {
            h[(j, j)] += 2.0 * r * p.cos[j];
        }
        h[(i, i)] += 2.0 * r * (w * p.cos[i] + p.sin[i]);
        h
    }

    fn component_values(&self, x: &DVector<f64>) -> Vec<f64> {
        let p = TrigPoint::new(x);
        (0..self.d)
            .map(|i| {
                let r = self.residual(&p, i);
                r * r
            })
            .collect()
    }

    fn component_gradients(&self, indices: &[usize], x: &DVector<f64>) -> Vec<DVector<f64>> {
        let p = TrigPoint::new(x);
        indices.iter().map(|&i| self.gradient_at(&p, i)).collect()
    }
}

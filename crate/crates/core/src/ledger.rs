//! Evaluation bookkeeping: full-function evaluations (FE), component
//! gradient evaluations (GE) and component Hessian evaluations (HE).
//!
//! Component derivatives are memoized per *point token*. The driver advances
//! the token whenever the iterate moves; an unsuccessful iteration keeps the
//! token and so reuses every derivative already paid for at that point.

use nalgebra::{DMatrix, DVector};

/// Identity of the point at which memoized derivatives were computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointToken(pub u64);

/// Cost weight of one component gradient relative to one component value.
pub const GRADIENT_COST_FACTOR: u64 = 3;

#[derive(Debug, Clone, Default)]
pub struct EvaluationLedger {
    fe_count: u64,
    ge_count: u64,
    he_count: u64,
    point: u64,
    gradients: Vec<Option<DVector<f64>>>,
    hessians: Vec<Option<DMatrix<f64>>>,
}

impl EvaluationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fe_count(&self) -> u64 {
        self.fe_count
    }

    pub fn ge_count(&self) -> u64 {
        self.ge_count
    }

    pub fn he_count(&self) -> u64 {
        self.he_count
    }

    pub fn point(&self) -> PointToken {
        PointToken(self.point)
    }

    /// Declares a new current point and drops every memoized derivative.
    pub fn advance_point(&mut self) -> PointToken {
        self.point += 1;
        self.gradients.clear();
        self.hessians.clear();
        PointToken(self.point)
    }

    /// `FE·d + 3·GE`, in units of one component-value evaluation.
    pub fn cost(&self, d: usize) -> u64 {
        self.fe_count * d as u64 + GRADIENT_COST_FACTOR * self.ge_count
    }

    pub(crate) fn charge_function_evaluation(&mut self) {
        self.fe_count += 1;
    }

    pub fn has_gradient(&self, i: usize) -> bool {
        matches!(self.gradients.get(i), Some(Some(_)))
    }

    pub fn has_hessian(&self, i: usize) -> bool {
        matches!(self.hessians.get(i), Some(Some(_)))
    }

    /// Number of component gradients memoized at the current point.
    pub fn cached_gradients(&self) -> usize {
        self.gradients.iter().filter(|g| g.is_some()).count()
    }

    /// Number of component Hessians memoized at the current point.
    pub fn cached_hessians(&self) -> usize {
        self.hessians.iter().filter(|h| h.is_some()).count()
    }

    pub(crate) fn gradient(&self, i: usize) -> &DVector<f64> {
        self.gradients[i]
            .as_ref()
            .expect("component gradient not memoized at current point")
    }

    pub(crate) fn hessian(&self, i: usize) -> &DMatrix<f64> {
        self.hessians[i]
            .as_ref()
            .expect("component Hessian not memoized at current point")
    }

    pub(crate) fn store_gradient(&mut self, i: usize, g: DVector<f64>) {
        if self.gradients.len() <= i {
            self.gradients.resize(i + 1, None);
        }
        debug_assert!(self.gradients[i].is_none());
        self.gradients[i] = Some(g);
        self.ge_count += 1;
    }

    pub(crate) fn store_hessian(&mut self, i: usize, h: DMatrix<f64>) {
        if self.hessians.len() <= i {
            self.hessians.resize(i + 1, None);
        }
        debug_assert!(self.hessians[i].is_none());
        self.hessians[i] = Some(h);
        self.he_count += 1;
    }
}

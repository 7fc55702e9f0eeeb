//! Finite-sum problems `f(x) = (1/d) Σ_i f_i(x)` and metered evaluation of
//! their full values and sub-sampled derivatives.
//!
//! Component indices are zero-based throughout. Every mean is accumulated in
//! ascending component index and then divided by the sample size, so a
//! sub-sampled derivative over the full index set is bit-identical to the
//! full derivative.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::ledger::EvaluationLedger;
use crate::linalg;
use crate::sampling::SampleSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("point has dimension {found}, problem expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("component index {index} out of range for d = {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("component index {0} repeated in sample")]
    DuplicateIndex(usize),
    #[error("sample of size {size} violates the cardinality rule (needs at least {required})")]
    CardinalityRule { size: usize, required: usize },
    #[error("invalid problem construction: {0}")]
    InvalidConstruction(String),
    #[error("unknown problem `{0}` (expected trig, quadratic or saddle)")]
    UnknownProblem(String),
}

/// Analytic constants of an oracle problem, valid on the region visited by a
/// trust-region run started at a given `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownConstants {
    /// Lipschitz constant of every sub-sampled gradient.
    pub lipschitz_gradient: f64,
    /// Lipschitz constant of every sub-sampled Hessian.
    pub lipschitz_hessian: f64,
    /// `sup_{x ∈ L_f(x0)} max_i ‖x − x*_i‖` (or an upper bound on it).
    pub d0: f64,
    /// Lower bound on `f`.
    pub f_low: f64,
}

/// A finite sum of `d` twice-differentiable components on `R^n`.
///
/// Implementations must be pure: equal inputs give bit-identical outputs.
pub trait FiniteSumProblem {
    fn name(&self) -> &str;

    /// Dimension `n` of the decision variable.
    fn dim(&self) -> usize;

    /// Number of components `d`.
    fn num_components(&self) -> usize;

    fn component_value(&self, i: usize, x: &DVector<f64>) -> f64;

    fn component_gradient(&self, i: usize, x: &DVector<f64>) -> DVector<f64>;

    fn component_hessian(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64>;

    /// All component values at `x`. Overrides may share work across
    /// components but must agree bit-for-bit with `component_value`.
    fn component_values(&self, x: &DVector<f64>) -> Vec<f64> {
        (0..self.num_components())
            .map(|i| self.component_value(i, x))
            .collect()
    }

    /// Gradients of the listed components at `x`, in the order given.
    /// Overrides must agree bit-for-bit with `component_gradient`.
    fn component_gradients(&self, indices: &[usize], x: &DVector<f64>) -> Vec<DVector<f64>> {
        indices
            .iter()
            .map(|&i| self.component_gradient(i, x))
            .collect()
    }

    /// Oracle constants for a run from `x0` whose steps never exceed `reach`.
    fn known_constants(&self, _x0: &DVector<f64>, _reach: f64) -> Option<KnownConstants> {
        None
    }
}

pub(crate) fn check_dim<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
) -> Result<(), ProblemError> {
    if x.len() != problem.dim() {
        return Err(ProblemError::DimensionMismatch {
            expected: problem.dim(),
            found: x.len(),
        });
    }
    Ok(())
}

fn check_sample<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    sample: &SampleSet,
) -> Result<Vec<usize>, ProblemError> {
    let d = problem.num_components();
    if sample.is_empty() {
        return Err(ProblemError::EmptySample);
    }
    let mut ascending = sample.indices().to_vec();
    ascending.sort_unstable();
    if let Some(&last) = ascending.last() {
        if last >= d {
            return Err(ProblemError::IndexOutOfRange { index: last, d });
        }
    }
    if let Some(w) = ascending.windows(2).find(|w| w[0] == w[1]) {
        return Err(ProblemError::DuplicateIndex(w[0]));
    }
    Ok(ascending)
}

/// Mean of component values, summed in ascending index order.
pub fn mean_value(values: &[f64]) -> f64 {
    let sum: f64 = values.iter().fold(0.0, |acc, v| acc + v);
    sum / values.len() as f64
}

/// Evaluates every component value at `x`; charged as one full evaluation.
pub fn component_values<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    ledger: &mut EvaluationLedger,
) -> Result<Vec<f64>, ProblemError> {
    check_dim(problem, x)?;
    ledger.charge_function_evaluation();
    Ok(problem.component_values(x))
}

/// `f(x) = (1/d) Σ_i f_i(x)`; charged as one full evaluation.
pub fn full_value<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    ledger: &mut EvaluationLedger,
) -> Result<f64, ProblemError> {
    Ok(mean_value(&component_values(problem, x, ledger)?))
}

/// Sub-sampled gradient `(1/|G|) Σ_{i∈G} ∇f_i(x)` at the ledger's current
/// point. Only components not yet memoized there are evaluated and charged.
pub fn sample_gradient<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    sample: &SampleSet,
    x: &DVector<f64>,
    ledger: &mut EvaluationLedger,
) -> Result<DVector<f64>, ProblemError> {
    check_dim(problem, x)?;
    let ascending = check_sample(problem, sample)?;
    let missing: Vec<usize> = ascending
        .iter()
        .copied()
        .filter(|&i| !ledger.has_gradient(i))
        .collect();
    if !missing.is_empty() {
        for (i, g) in missing.iter().zip(problem.component_gradients(&missing, x)) {
            ledger.store_gradient(*i, g);
        }
    }
    let mut sum = DVector::zeros(problem.dim());
    for &i in &ascending {
        sum += ledger.gradient(i);
    }
    Ok(sum / ascending.len() as f64)
}

/// Sub-sampled Hessian `(1/|H|) Σ_{i∈H} ∇²f_i(x)`, memoized like
/// [`sample_gradient`] and symmetrized.
pub fn sample_hessian<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    sample: &SampleSet,
    x: &DVector<f64>,
    ledger: &mut EvaluationLedger,
) -> Result<DMatrix<f64>, ProblemError> {
    check_dim(problem, x)?;
    let ascending = check_sample(problem, sample)?;
    let n = problem.dim();
    let mut sum = DMatrix::zeros(n, n);
    for &i in &ascending {
        if !ledger.has_hessian(i) {
            let h = problem.component_hessian(i, x);
            ledger.store_hessian(i, h);
        }
        sum += ledger.hessian(i);
    }
    sum /= ascending.len() as f64;
    linalg::symmetrize(&mut sum);
    Ok(sum)
}

/// Full gradient outside the ledger. Used only by stopping tests, which are
/// not part of the cost measure.
pub fn unmetered_full_gradient<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
) -> Result<DVector<f64>, ProblemError> {
    check_dim(problem, x)?;
    let d = problem.num_components();
    let all: Vec<usize> = (0..d).collect();
    let mut sum = DVector::zeros(problem.dim());
    for g in problem.component_gradients(&all, x) {
        sum += g;
    }
    Ok(sum / d as f64)
}

/// Full Hessian outside the ledger (stopping tests only).
pub fn unmetered_full_hessian<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>, ProblemError> {
    check_dim(problem, x)?;
    let n = problem.dim();
    let d = problem.num_components();
    let mut sum = DMatrix::zeros(n, n);
    for i in 0..d {
        sum += problem.component_hessian(i, x);
    }
    sum /= d as f64;
    linalg::symmetrize(&mut sum);
    Ok(sum)
}

/// Full value outside the ledger.
pub fn unmetered_full_value<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
) -> Result<f64, ProblemError> {
    check_dim(problem, x)?;
    Ok(mean_value(&problem.component_values(x)))
}

//! Hessian models: safeguarded BFGS for the first-order methods and
//! sub-sampled Hessians for the second-order method.

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::ledger::EvaluationLedger;
use crate::linalg;
use crate::problem::{self, FiniteSumProblem, ProblemError};
use crate::sampling::SampleSet;

/// Updates with `sᵀy ≤ CURVATURE_TOL·‖s‖‖y‖` are skipped.
pub const CURVATURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Applied,
    /// `sᵀy` too small relative to `‖s‖‖y‖`.
    SkippedCurvature,
    /// `sᵀBs ≤ 0`; `B` has drifted from positive definiteness.
    SkippedIndefinite,
}

/// Dense BFGS approximation, started from the identity.
#[derive(Debug, Clone)]
pub struct BfgsState {
    matrix: DMatrix<f64>,
    skipped: usize,
}

impl BfgsState {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            skipped: 0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Number of updates skipped so far.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// `B⁺ = B − (Bs)(Bs)ᵀ/(sᵀBs) + yyᵀ/(sᵀy)`, symmetrized; skipped if the
    /// curvature condition fails.
    pub fn update(&mut self, s: &DVector<f64>, y: &DVector<f64>) -> UpdateOutcome {
        let sy = s.dot(y);
        if !(sy > CURVATURE_TOL * s.norm() * y.norm()) {
            self.skipped += 1;
            return UpdateOutcome::SkippedCurvature;
        }
        let bs = &self.matrix * s;
        let sbs = s.dot(&bs);
        if !(sbs > 0.0) {
            debug!("BFGS update skipped: sᵀBs = {sbs:e}");
            self.skipped += 1;
            return UpdateOutcome::SkippedIndefinite;
        }
        self.matrix.ger(-1.0 / sbs, &bs, &bs, 1.0);
        self.matrix.ger(1.0 / sy, y, y, 1.0);
        linalg::symmetrize(&mut self.matrix);
        UpdateOutcome::Applied
    }
}

/// `y = g_new − g_old`: full gradients for the baseline, sampled gradients
/// (already computed by the inner loops) for the sub-sampled method.
pub fn gradient_difference(g_new: &DVector<f64>, g_old: &DVector<f64>) -> DVector<f64> {
    g_new - g_old
}

/// Second-order model Hessian `∇²f_H(x)`.
pub fn second_order_model<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    sample: &SampleSet,
    x: &DVector<f64>,
    ledger: &mut EvaluationLedger,
) -> Result<DMatrix<f64>, ProblemError> {
    problem::sample_hessian(problem, sample, x, ledger)
}

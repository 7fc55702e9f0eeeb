//! Deterministic sub-sampled trust-region methods for finite-sum problems
//! `min_x (1/d) Σ_i f_i(x)`.
//!
//! Sample sizes are driven by the trust-region radius: a component ordering
//! by value is computed at each new iterate, and each inner loop takes the
//! shortest prefix of that ordering whose sampled gradient (or Hessian) is
//! informative enough. No randomness is involved anywhere, so runs are
//! bit-reproducible.
//!
//! ```
//! use nalgebra::DVector;
//! use subsampled_tr::{problems::TrigProblem, run_first_order, SolverParams};
//!
//! let problem = TrigProblem::new(20);
//! let x0 = DVector::from_element(20, 1.0);
//! let report = run_first_order(&problem, &x0, &SolverParams::default()).unwrap();
//! assert!(report.converged());
//! assert_eq!(report.cost, report.fe_count * 20 + 3 * report.ge_count);
//! ```

// `!(a > b)` is used on purpose: NaN must fail these tests.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod driver;
pub mod hessian;
pub mod ledger;
pub mod linalg;
pub mod problem;
pub mod problems;
pub mod sampling;
pub mod subproblem;

pub use bounds::BoundInputs;
pub use driver::{
    run_baseline_tr, run_first_order, run_second_order, solve, Algorithm, BfgsPairing,
    IterationRecord, SolveError, SolveReport, SolverParams, Termination,
};
pub use ledger::EvaluationLedger;
pub use problem::{FiniteSumProblem, KnownConstants, ProblemError};
pub use sampling::{Branch, OrderingRule, SampleSet};
pub use subproblem::{QuadraticModel, StepKind};

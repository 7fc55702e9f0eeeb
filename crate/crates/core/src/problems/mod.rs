//! Built-in test problems.

mod quadratic;
mod saddle;
mod trig;

pub use quadratic::QuadraticOracle;
pub use saddle::SaddleProblem;
pub use trig::TrigProblem;

use nalgebra::DVector;

use crate::problem::{FiniteSumProblem, ProblemError};

pub fn make_trig_problem(d: usize) -> TrigProblem {
    TrigProblem::new(d)
}

pub fn make_quadratic_oracle(
    n: usize,
    d: usize,
    centers: Vec<DVector<f64>>,
) -> Result<QuadraticOracle, ProblemError> {
    QuadraticOracle::with_shape(n, d, centers)
}

pub fn make_saddle_problem(n: usize, d: usize) -> Result<SaddleProblem, ProblemError> {
    SaddleProblem::new(n, d)
}

/// Selects a built-in problem by name with `d` components and `n = d`.
///
/// `quadratic` uses centers `c_i = (1 + i/d)·e_i`; `saddle` uses the
/// construction of [`SaddleProblem`].
pub fn builtin(
    name: &str,
    d: usize,
) -> Result<Box<dyn FiniteSumProblem + Send + Sync>, ProblemError> {
    if d == 0 {
        return Err(ProblemError::InvalidConstruction(
            "d must be positive".into(),
        ));
    }
    match name {
        "trig" => Ok(Box::new(TrigProblem::new(d))),
        "quadratic" => {
            let centers = (0..d)
                .map(|i| {
                    let mut c = DVector::zeros(d);
                    c[i] = 1.0 + i as f64 / d as f64;
                    c
                })
                .collect();
            Ok(Box::new(QuadraticOracle::with_shape(d, d, centers)?))
        }
        "saddle" => Ok(Box::new(SaddleProblem::new(d, d)?)),
        other => Err(ProblemError::UnknownProblem(other.to_string())),
    }
}

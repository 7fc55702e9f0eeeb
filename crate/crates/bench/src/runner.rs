use log::info;
use nalgebra::DVector;
use thiserror::Error;

use subsampled_tr::problems;
use subsampled_tr::{solve, Algorithm, ProblemError, SolveError, SolveReport};

use crate::config::BenchConfig;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// One solver run within a benchmark.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub d: usize,
    pub report: SolveReport,
    /// Set when the run aborted on a broken invariant; `report` then holds
    /// the trace up to that point.
    pub violation: Option<String>,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        self.violation.is_none() && self.report.converged()
    }
}

/// Cost comparison at one problem size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub d: usize,
    pub cost_tr: Option<u64>,
    pub cost_str: Option<u64>,
    /// `round(100·(1 − cost_str/cost_tr))`, when both costs exist.
    pub reduction_percent: Option<i64>,
    /// Sub-sampled method behind `cost_str`.
    pub compared: Option<Algorithm>,
    /// Some run at this size did not converge.
    pub failed: bool,
}

impl BenchRow {
    pub fn new(
        d: usize,
        cost_tr: Option<u64>,
        cost_str: Option<u64>,
        compared: Option<Algorithm>,
        failed: bool,
    ) -> Self {
        let reduction_percent = match (cost_tr, cost_str) {
            (Some(t), Some(s)) if t > 0 => Some(reduction_percent(t, s)),
            _ => None,
        };
        Self {
            d,
            cost_tr,
            cost_str,
            reduction_percent,
            compared,
            failed,
        }
    }
}

pub fn reduction_percent(cost_tr: u64, cost_str: u64) -> i64 {
    (100.0 * (1.0 - cost_str as f64 / cost_tr as f64)).round() as i64
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub runs: Vec<RunRecord>,
}

impl BenchOutcome {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(RunRecord::converged)
    }

    pub fn any_violation(&self) -> bool {
        self.runs.iter().any(|r| r.violation.is_some())
    }

    /// 0 if every run converged, 3 on a broken invariant, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.any_violation() {
            3
        } else if self.all_converged() {
            0
        } else {
            2
        }
    }
}

/// Starting point for a built-in problem: all ones, except for `saddle`,
/// which starts next to the saddle point along its stable direction.
pub fn start_point(problem: &str, n: usize) -> DVector<f64> {
    match problem {
        "saddle" => {
            let mut x = DVector::zeros(n);
            x[0] = 1e-3;
            x
        }
        _ => DVector::from_element(n, 1.0),
    }
}

/// Runs every selected algorithm at every size.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    config.validate()?;
    let algorithms = config.unique_algorithms();
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &d in &config.sizes {
        let problem = problems::builtin(&config.problem, d)?;
        let x0 = start_point(&config.problem, problem.dim());
        let first = runs.len();
        for &algorithm in &algorithms {
            let record = match solve(problem.as_ref(), &x0, algorithm, &config.params) {
                Ok(report) => RunRecord {
                    d,
                    report,
                    violation: None,
                },
                Err(SolveError::InvariantViolation {
                    iteration,
                    reason,
                    report,
                }) => RunRecord {
                    d,
                    report: *report,
                    violation: Some(format!("iteration {iteration}: {reason}")),
                },
                Err(SolveError::Problem(e)) => return Err(e.into()),
                Err(SolveError::InvalidParams(msg)) => return Err(BenchError::Config(msg)),
            };
            info!(
                "{} d = {d}: {} after {} iterations, cost {}",
                algorithm.label(),
                record.report.termination.label(),
                record.report.records.len(),
                record.report.cost
            );
            runs.push(record);
        }
        let here = &runs[first..];
        let cost_of = |a: Algorithm| {
            here.iter()
                .find(|r| r.report.algorithm == a)
                .map(|r| r.report.cost)
        };
        let compared = [Algorithm::SubsampledFo, Algorithm::SubsampledSo]
            .into_iter()
            .find(|a| algorithms.contains(a));
        rows.push(BenchRow::new(
            d,
            cost_of(Algorithm::BaselineTr),
            compared.and_then(cost_of),
            compared,
            !here.iter().all(RunRecord::converged),
        ));
    }
    Ok(BenchOutcome { rows, runs })
}

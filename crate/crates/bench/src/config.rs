use std::path::PathBuf;

use subsampled_tr::{Algorithm, SolverParams};

use crate::runner::BenchError;

/// Problem sizes of the standard trig comparison.
pub const DEFAULT_SIZES: [usize; 4] = [100, 500, 1000, 3000];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Built-in problem name: `trig`, `quadratic` or `saddle`.
    pub problem: String,
    pub sizes: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub params: SolverParams,
    /// Directory receiving one trace CSV per run.
    pub trace_dir: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            problem: "trig".into(),
            sizes: DEFAULT_SIZES.to_vec(),
            algorithms: vec![Algorithm::BaselineTr, Algorithm::SubsampledFo],
            params: SolverParams::default(),
            trace_dir: None,
            report_path: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.sizes.is_empty() {
            return Err(BenchError::Config("no problem sizes given".into()));
        }
        if self.sizes.contains(&0) {
            return Err(BenchError::Config("problem sizes must be positive".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithm selected".into()));
        }
        self.params
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Algorithms in the order given, duplicates dropped.
    pub fn unique_algorithms(&self) -> Vec<Algorithm> {
        let mut out: Vec<Algorithm> = Vec::new();
        for &a in &self.algorithms {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}

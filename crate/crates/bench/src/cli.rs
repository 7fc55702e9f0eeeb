use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use subsampled_tr::{Algorithm, SolverParams};

use crate::config::{BenchConfig, DEFAULT_SIZES};
use crate::output::{emit_report_json, emit_trace_csv, trace_file_name};
use crate::runner::{run_benchmark, BenchError, BenchOutcome};

/// Exit code for usage, configuration and I/O errors.
pub const EXIT_ERROR: i32 = 1;

/// Published costs for the trig benchmark: `(d, TR, STR)`.
pub const REFERENCE_COSTS: [(usize, u64, u64); 4] = [
    (100, 35_900, 34_292),
    (500, 194_500, 117_097),
    (1000, 626_000, 419_053),
    (3000, 1_488_000, 736_395),
];

/// Compare full-sample and sub-sampled trust-region solvers.
#[derive(Debug, Parser)]
#[command(name = "str-bench", version)]
pub struct Args {
    /// Built-in problem: trig, quadratic or saddle.
    #[arg(long, default_value = "trig")]
    pub problem: String,
    /// Problem size (number of components); repeatable. Defaults to 100, 500, 1000, 3000.
    #[arg(long = "d")]
    pub sizes: Vec<usize>,
    /// Solver to run: tr, str or str2; repeatable. Defaults to tr and str.
    #[arg(long = "algorithm", value_parser = parse_algorithm)]
    pub algorithms: Vec<Algorithm>,
    #[arg(long)]
    pub eps_g: Option<f64>,
    #[arg(long)]
    pub eps_h: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Curvature coefficient of the second-order decrease test.
    #[arg(long)]
    pub kappa_eigen: Option<f64>,
    /// Iteration cap per run (default 100·d).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Directory for per-run trace CSVs.
    #[arg(long, value_name = "DIR")]
    pub trace_csv: Option<PathBuf>,
    /// Path of the JSON report.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Accepted for compatibility; the solvers use no randomness.
    #[arg(long)]
    pub seedless: bool,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::from_label(s)
        .ok_or_else(|| format!("unknown algorithm `{s}` (expected tr, str or str2)"))
}

impl Args {
    pub fn into_config(self) -> BenchConfig {
        let defaults = SolverParams::default();
        let params = SolverParams {
            eps_g: self.eps_g.unwrap_or(defaults.eps_g),
            eps_h: self.eps_h.unwrap_or(defaults.eps_h),
            delta0: self.delta0.unwrap_or(defaults.delta0),
            delta_max: self.delta_max.unwrap_or(defaults.delta_max),
            gamma: self.gamma.unwrap_or(defaults.gamma),
            alpha: self.alpha.unwrap_or(defaults.alpha),
            kappa: self.kappa_eigen.unwrap_or(defaults.kappa),
            max_iterations: self.max_iters,
            ..defaults
        };
        BenchConfig {
            problem: self.problem,
            sizes: if self.sizes.is_empty() {
                DEFAULT_SIZES.to_vec()
            } else {
                self.sizes
            },
            algorithms: if self.algorithms.is_empty() {
                vec![Algorithm::BaselineTr, Algorithm::SubsampledFo]
            } else {
                self.algorithms
            },
            params,
            trace_dir: self.trace_csv,
            report_path: self.report,
        }
    }
}

/// Cost table, with the published numbers alongside for the trig problem.
pub fn summary(config: &BenchConfig, outcome: &BenchOutcome) -> String {
    let cell = |v: Option<u64>| v.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
    let mut out = format!(
        "{:>6} {:>12} {:>12} {:>9}  {}\n",
        "d", "cost_tr", "cost_str", "reduction", "status"
    );
    for row in &outcome.rows {
        let reduction = row
            .reduction_percent
            .map(|p| format!("{p}%"))
            .unwrap_or_else(|| "-".into());
        let status = if row.failed { "FAILED" } else { "ok" };
        out.push_str(&format!(
            "{:>6} {:>12} {:>12} {:>9}  {status}",
            row.d,
            cell(row.cost_tr),
            cell(row.cost_str),
            reduction
        ));
        if config.problem == "trig" {
            if let Some((_, tr, st)) = REFERENCE_COSTS.iter().find(|r| r.0 == row.d) {
                out.push_str(&format!("  (published: {tr} / {st})"));
            }
        }
        out.push('\n');
    }
    out
}

/// Runs the benchmark and writes the requested files.
pub fn execute(config: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    let outcome = run_benchmark(config)?;
    if let Some(dir) = &config.trace_dir {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for run in &outcome.runs {
            let name = trace_file_name(&config.problem, run.d, run.report.algorithm.label());
            emit_trace_csv(&run.report, &dir.join(name))?;
        }
    }
    if let Some(path) = &config.report_path {
        emit_report_json(config, &outcome.rows, &outcome.runs, path)?;
    }
    Ok(outcome)
}

/// Parses `args`, runs, prints the summary and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_ERROR,
            };
        }
    };
    let config = args.into_config();
    match execute(&config) {
        Ok(outcome) => {
            print!("{}", summary(&config, &outcome));
            for run in outcome.runs.iter().filter(|r| !r.converged()) {
                let why = run
                    .violation
                    .as_deref()
                    .unwrap_or(run.report.termination.label());
                eprintln!("{} d = {}: {why}", run.report.algorithm.label(), run.d);
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

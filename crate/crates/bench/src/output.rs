use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use subsampled_tr::{
    BfgsPairing, Branch, IterationRecord, OrderingRule, SolveReport, SolverParams,
};

use crate::config::BenchConfig;
use crate::runner::{BenchError, BenchRow, RunRecord};

pub const TRACE_HEADER: [&str; 12] = [
    "k",
    "success",
    "delta",
    "j_k",
    "sample_size_g",
    "sample_size_h",
    "f_value",
    "full_grad_norm",
    "rho",
    "model_decrease",
    "branch",
    "cumulative_cost",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn branch_label(b: Branch) -> &'static str {
    match b {
        Branch::Gradient => "gradient",
        Branch::Hessian => "hessian",
    }
}

fn io_error(path: &Path, source: std::io::Error) -> BenchError {
    BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub success: bool,
    pub delta: f64,
    pub j_k: Option<usize>,
    pub sample_size_g: usize,
    pub sample_size_h: Option<usize>,
    pub f_value: f64,
    pub full_grad_norm: f64,
    pub rho: f64,
    pub model_decrease: f64,
    pub branch: Option<String>,
    pub cumulative_cost: u64,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            k: r.k,
            success: r.success,
            delta: r.delta,
            j_k: r.j_k,
            sample_size_g: r.sample_size_g,
            sample_size_h: r.sample_size_h,
            f_value: r.f_value,
            full_grad_norm: r.full_grad_norm,
            rho: r.rho,
            model_decrease: r.model_decrease,
            branch: r.branch.map(|b| branch_label(b).to_string()),
            cumulative_cost: r.cumulative_cost,
        }
    }
}

fn csv_fields(r: &IterationRecord) -> [String; 12] {
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    [
        r.k.to_string(),
        r.success.to_string(),
        format_float(r.delta),
        opt(r.j_k),
        r.sample_size_g.to_string(),
        opt(r.sample_size_h),
        format_float(r.f_value),
        format_float(r.full_grad_norm),
        format_float(r.rho),
        format_float(r.model_decrease),
        r.branch.map(branch_label).unwrap_or_default().to_string(),
        r.cumulative_cost.to_string(),
    ]
}

/// Writes one CSV row per iteration of `report`.
pub fn emit_trace_csv(report: &SolveReport, path: &Path) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(TRACE_HEADER)?;
    for r in &report.records {
        w.write_record(csv_fields(r))?;
    }
    w.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TRACE_HEADER {
        return Err(BenchError::Config(format!(
            "unexpected trace header {header:?}"
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(BenchError::from))
        .collect()
}

/// File name of the trace of one run.
pub fn trace_file_name(problem: &str, d: usize, algorithm: &str) -> String {
    format!("{problem}_d{d}_{algorithm}.csv")
}

#[derive(Serialize)]
struct ParamsDoc {
    eps_g: f64,
    eps_h: f64,
    delta0: f64,
    delta_max: f64,
    gamma: f64,
    alpha: f64,
    kappa_eigen: f64,
    max_iters: Option<usize>,
    ordering: &'static str,
    lazy_curvature_monitor: bool,
    skip_vacuous_trials: bool,
    bfgs_pairing: &'static str,
}

impl From<&SolverParams> for ParamsDoc {
    fn from(p: &SolverParams) -> Self {
        Self {
            eps_g: p.eps_g,
            eps_h: p.eps_h,
            delta0: p.delta0,
            delta_max: p.delta_max,
            gamma: p.gamma,
            alpha: p.alpha,
            kappa_eigen: p.kappa,
            max_iters: p.max_iterations,
            ordering: match p.ordering {
                OrderingRule::ValueDescending => "value_descending",
                OrderingRule::IndexAscending => "index_ascending",
            },
            lazy_curvature_monitor: p.lazy_curvature_monitor,
            skip_vacuous_trials: p.skip_vacuous_trials,
            bfgs_pairing: match p.bfgs_pairing {
                BfgsPairing::CurrentSample => "current_sample",
                BfgsPairing::FirstSample => "first_sample",
            },
        }
    }
}

#[derive(Serialize)]
struct ConfigDoc<'a> {
    problem: &'a str,
    sizes: &'a [usize],
    algorithms: Vec<&'static str>,
    params: ParamsDoc,
}

#[derive(Serialize)]
struct RowDoc {
    d: usize,
    cost_tr: Option<u64>,
    cost_str: Option<u64>,
    reduction_percent: Option<i64>,
    compared: Option<&'static str>,
    failed: bool,
}

#[derive(Serialize)]
struct RunDoc<'a> {
    d: usize,
    algorithm: &'static str,
    termination: &'static str,
    converged: bool,
    violation: Option<&'a str>,
    hitting_index: Option<usize>,
    iterations: usize,
    successful_iterations: usize,
    fe: u64,
    ge: u64,
    he: u64,
    cost: u64,
    min_sample_size_g: Option<usize>,
    final_value: f64,
    final_grad_norm: f64,
    final_min_curvature: Option<f64>,
    bfgs_skipped: usize,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    config: ConfigDoc<'a>,
    rows: Vec<RowDoc>,
    runs: Vec<RunDoc<'a>>,
}

/// Writes the JSON report: configuration echo, one row per size, and the
/// evaluation counts and termination of every run.
pub fn emit_report_json(
    config: &BenchConfig,
    rows: &[BenchRow],
    runs: &[RunRecord],
    path: &Path,
) -> Result<(), BenchError> {
    let doc = ReportDoc {
        config: ConfigDoc {
            problem: &config.problem,
            sizes: &config.sizes,
            algorithms: config
                .unique_algorithms()
                .iter()
                .map(|a| a.label())
                .collect(),
            params: (&config.params).into(),
        },
        rows: rows
            .iter()
            .map(|r| RowDoc {
                d: r.d,
                cost_tr: r.cost_tr,
                cost_str: r.cost_str,
                reduction_percent: r.reduction_percent,
                compared: r.compared.map(|a| a.label()),
                failed: r.failed,
            })
            .collect(),
        runs: runs
            .iter()
            .map(|r| {
                let rep = &r.report;
                RunDoc {
                    d: r.d,
                    algorithm: rep.algorithm.label(),
                    termination: if r.violation.is_some() {
                        "invariant_violation"
                    } else {
                        rep.termination.label()
                    },
                    converged: r.converged(),
                    violation: r.violation.as_deref(),
                    hitting_index: rep.hitting_index,
                    iterations: rep.records.len(),
                    successful_iterations: rep.successful_iterations().count(),
                    fe: rep.fe_count,
                    ge: rep.ge_count,
                    he: rep.he_count,
                    cost: rep.cost,
                    min_sample_size_g: rep.successful_iterations().map(|x| x.sample_size_g).min(),
                    final_value: rep.final_value,
                    final_grad_norm: rep.final_grad_norm,
                    final_min_curvature: rep.final_min_curvature,
                    bfgs_skipped: rep.bfgs_skipped,
                }
            })
            .collect(),
    };
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.write_all(b"\n").map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

//! Benchmark harness for the sub-sampled trust-region solvers.
//!
//! Runs the full-sample baseline against the sub-sampled methods over a list
//! of problem sizes, prints a cost table, and writes per-iteration CSV traces
//! and a JSON report. Everything is deterministic, so two invocations with the
//! same arguments produce byte-identical files.

pub mod cli;
pub mod config;
pub mod output;
pub mod runner;

pub use config::{BenchConfig, DEFAULT_SIZES};
pub use output::{emit_report_json, emit_trace_csv, read_trace_csv, TraceRow, TRACE_HEADER};
pub use runner::{run_benchmark, BenchError, BenchOutcome, BenchRow, RunRecord};

//! Benchmark harness for the rotary-embedding kernel library.
//!
//! Runs an oracle-backed equivalence check across the selected execution
//! paths, times them on a configurable `[B, N, S, D]` payload, and reports
//! speedup metrics (`t0/t` and `(t0-t)/t0` against the split/merge
//! baseline) as CSV, Markdown, or JSON.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{default_impls, BenchConfig, ImplKind, Precision, ReportFormat};
pub use error::BenchError;
pub use report::{speedup_pct, speedup_times, BenchEnv, BenchReport, BenchRow, CSV_HEADER};
pub use runner::run_bench;

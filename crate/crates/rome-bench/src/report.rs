//! Benchmark report: rows, speedup arithmetic, and the CSV/Markdown/JSON
//! writers.

use crate::config::ReportFormat;
use crate::error::BenchError;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Exact CSV column order; the writer emits this header byte for byte.
pub const CSV_HEADER: &str =
    "impl,mode,dims,B,N,S,D,precision,iters,mean_ms,median_ms,stddev_ms,speedup_times,speedup_pct";

/// Speedup in multiples: `t0 / t`.
pub fn speedup_times(baseline_ms: f64, impl_ms: f64) -> f64 {
    baseline_ms / impl_ms
}

/// Speedup as a fraction saved: `(t0 - t) / t0`.
pub fn speedup_pct(baseline_ms: f64, impl_ms: f64) -> f64 {
    (baseline_ms - impl_ms) / baseline_ms
}

/// One timed implementation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(rename = "impl")]
    pub impl_name: String,
    pub mode: String,
    /// Axis split rendered as `44,44,40`; quoted in CSV.
    pub dims: String,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub precision: String,
    pub iters: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub stddev_ms: f64,
    pub speedup_times: f64,
    pub speedup_pct: f64,
}

/// Where and how the numbers were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEnv {
    pub host: String,
    pub precision: String,
    pub build: String,
    pub timestamp: String,
}

impl BenchEnv {
    pub fn capture(precision: &str) -> Self {
        Self {
            host: std::env::var("HOSTNAME")
                .or_else(|_| std::env::var("HOST"))
                .unwrap_or_else(|_| "unknown".into()),
            precision: precision.to_string(),
            build: if cfg!(debug_assertions) {
                "debug"
            } else {
                "release"
            }
            .into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

/// A full benchmark report: environment plus one row per implementation,
/// baseline first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub env: BenchEnv,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("csv serialization");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "| impl | mode | dims | B | N | S | D | precision | iters | mean_ms | median_ms | stddev_ms | speedup_times | speedup_pct |\n",
        );
        out.push_str(
            "|------|------|------|---|---|---|---|-----------|-------|---------|-----------|-----------|---------------|-------------|\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.3} | {:.1}% |\n",
                r.impl_name,
                r.mode,
                r.dims,
                r.b,
                r.n,
                r.s,
                r.d,
                r.precision,
                r.iters,
                r.mean_ms,
                r.median_ms,
                r.stddev_ms,
                r.speedup_times,
                r.speedup_pct * 100.0,
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("json serialization")
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Md => self.to_markdown(),
            ReportFormat::Json => self.to_json(),
        }
    }

    pub fn write_to(&self, format: ReportFormat, path: &Path) -> Result<(), BenchError> {
        let io_err = |source| BenchError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut file = std::fs::File::create(path).map_err(io_err)?;
        file.write_all(self.render(format).as_bytes())
            .map_err(io_err)?;
        Ok(())
    }
}

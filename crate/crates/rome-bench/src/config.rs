//! Benchmark configuration: flag parsing, presets, validation.

use crate::error::BenchError;
use rome_kernels::PairingMode;
use std::str::FromStr;

/// Working element type of the timed kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }

    /// Absolute equivalence tolerance against the dense oracle.
    pub fn tolerance(self) -> f64 {
        match self {
            Precision::F32 => 1e-5,
            Precision::F64 => 1e-12,
        }
    }
}

impl FromStr for Precision {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "f32" | "32" | "32-bit" => Ok(Precision::F32),
            "f64" | "64" | "64-bit" => Ok(Precision::F64),
            other => Err(BenchError::config(format!(
                "unknown precision '{other}' (expected f32 or f64)"
            ))),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An execution path the harness can time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImplKind {
    /// Literal split/rotate/merge recipe, single feature axis.
    Reference,
    /// Factorized multi-axis recipe with real slicing and concatenation.
    ReferenceNd,
    /// Structured map applied as a gather, plain elementwise combine.
    RomeGather,
    /// Structured map applied as a dense matrix product.
    RomeMatmul,
    /// Gather plus the fused `mul_add_mul` combine.
    RomeFused,
    /// Two-stage concurrent tile pipeline over the fused path.
    RomePipelined,
    /// Full dense rotation per position, f64. The quadratic arm.
    DenseOracle,
}

impl ImplKind {
    pub const ALL: [ImplKind; 7] = [
        ImplKind::Reference,
        ImplKind::ReferenceNd,
        ImplKind::RomeGather,
        ImplKind::RomeMatmul,
        ImplKind::RomeFused,
        ImplKind::RomePipelined,
        ImplKind::DenseOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ImplKind::Reference => "reference",
            ImplKind::ReferenceNd => "reference-nd",
            ImplKind::RomeGather => "rome-gather",
            ImplKind::RomeMatmul => "rome-matmul",
            ImplKind::RomeFused => "rome-fused",
            ImplKind::RomePipelined => "rome-pipelined",
            ImplKind::DenseOracle => "dense-oracle",
        }
    }
}

impl FromStr for ImplKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        ImplKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ImplKind::ALL.iter().map(|k| k.name()).collect();
                BenchError::config(format!(
                    "unknown implementation '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

impl std::fmt::Display for ImplKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Md,
    Json,
}

impl FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Md),
            "json" => Ok(ReportFormat::Json),
            other => Err(BenchError::config(format!(
                "unknown report format '{other}' (expected csv, md, json)"
            ))),
        }
    }
}

/// Fully resolved benchmark run description.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// `[B, N, S, D]`: batch, heads, positions, feature width.
    pub shape: [usize; 4],
    pub mode: PairingMode,
    pub dims: Vec<usize>,
    pub impls: Vec<ImplKind>,
    /// Measured iterations per implementation.
    pub iters: usize,
    /// Discarded iterations per implementation.
    pub warmup: usize,
    pub seed: u64,
    /// Verify every implementation against the dense oracle before timing.
    pub check: bool,
    pub precision: Precision,
    /// Move angle-table and map construction inside the timed region.
    pub include_setup: bool,
    /// Pipeline arm: rows per tile.
    pub tile_rows: usize,
    /// Pipeline arm: queue capacity.
    pub queue_depth: usize,
    /// Test instrumentation: corrupt this implementation's output inside the
    /// equivalence check to exercise the fail-closed path.
    pub fault_inject: Option<ImplKind>,
}

impl BenchConfig {
    /// The paper-preset single-operator configuration.
    pub const PAPER_SHAPE: [usize; 4] = [1, 24, 28800, 128];
    pub const PAPER_DIMS: [usize; 3] = [44, 44, 40];

    pub fn batch(&self) -> usize {
        self.shape[0]
    }
    pub fn heads(&self) -> usize {
        self.shape[1]
    }
    pub fn positions(&self) -> usize {
        self.shape[2]
    }
    pub fn width(&self) -> usize {
        self.shape[3]
    }

    /// The row all speedups are measured against.
    pub fn baseline(&self) -> ImplKind {
        if self.dims.len() == 1 {
            ImplKind::Reference
        } else {
            ImplKind::ReferenceNd
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.shape.contains(&0) {
            return Err(BenchError::config(format!(
                "shape entries must be positive, got {:?}",
                self.shape
            )));
        }
        if self.iters == 0 {
            return Err(BenchError::config("--iters must be at least 1"));
        }
        let dim_sum: usize = self.dims.iter().sum();
        if dim_sum != self.width() {
            return Err(BenchError::config(format!(
                "--dims {:?} sum to {dim_sum}, but shape D is {}",
                self.dims,
                self.width()
            )));
        }
        for &d in &self.dims {
            self.mode.validate_dim(d).map_err(|e| {
                BenchError::config(format!("--dims conflicts with --mode {}: {e}", self.mode))
            })?;
        }
        if self.impls.is_empty() {
            return Err(BenchError::config(
                "--impls must name at least one implementation",
            ));
        }
        if self.dims.len() > 1 && self.impls.contains(&ImplKind::Reference) {
            return Err(BenchError::config(
                "'reference' is the single-axis recipe; with a multi-axis --dims use 'reference-nd'",
            ));
        }
        if !self.impls.contains(&self.baseline()) {
            return Err(BenchError::config(format!(
                "speedups are measured against '{}'; include it in --impls",
                self.baseline().name()
            )));
        }
        if self.tile_rows == 0 || self.queue_depth == 0 {
            return Err(BenchError::config(
                "--tile-rows and --queue-depth must be at least 1",
            ));
        }
        if let Some(k) = self.fault_inject {
            if !self.impls.contains(&k) {
                return Err(BenchError::config(format!(
                    "--fault-inject names '{}', which is not in --impls",
                    k.name()
                )));
            }
        }
        Ok(())
    }
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            shape: [1, 8, 4096, 128],
            mode: PairingMode::Interleave,
            dims: vec![128],
            impls: vec![
                ImplKind::Reference,
                ImplKind::RomeGather,
                ImplKind::RomeFused,
                ImplKind::RomePipelined,
            ],
            iters: 50,
            warmup: 5,
            seed: 42,
            check: true,
            precision: Precision::F32,
            include_setup: false,
            tile_rows: 128,
            queue_depth: 4,
            fault_inject: None,
        }
    }
}

/// Parse a comma-separated list of positive integers.
pub fn parse_usize_list(s: &str, flag: &str) -> Result<Vec<usize>, BenchError> {
    s.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                BenchError::config(format!(
                    "{flag} expects comma-separated integers, got '{part}'"
                ))
            })
        })
        .collect()
}

/// The default implementation set for a given axis split: the baseline plus
/// the linear-cost structured arms. The quadratic arms (rome-matmul,
/// dense-oracle) are opt-in.
pub fn default_impls(dims: &[usize]) -> Vec<ImplKind> {
    let baseline = if dims.len() == 1 {
        ImplKind::Reference
    } else {
        ImplKind::ReferenceNd
    };
    vec![
        baseline,
        ImplKind::RomeGather,
        ImplKind::RomeFused,
        ImplKind::RomePipelined,
    ]
}

//! Harness errors, each mapped to a documented process exit code.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    /// Bad flags or an inconsistent configuration. Exit code 1.
    #[error("{0}")]
    Config(String),

    /// An implementation disagreed with the dense oracle. Exit code 2.
    #[error(
        "equivalence check failed for '{impl_name}': max |delta| = {max_delta:e} \
         at row {row}, col {col} (tolerance {tolerance:e})"
    )]
    Equivalence {
        impl_name: String,
        max_delta: f64,
        row: usize,
        col: usize,
        tolerance: f64,
    },

    /// Report could not be written. Exit code 3.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 1,
            BenchError::Equivalence { .. } => 2,
            BenchError::Io { .. } => 3,
        }
    }
}

impl From<rome_kernels::KernelError> for BenchError {
    fn from(e: rome_kernels::KernelError) -> Self {
        BenchError::Config(e.to_string())
    }
}

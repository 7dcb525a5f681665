//! Error type shared by every kernel in the crate.

use thiserror::Error;

/// Errors raised by tensor construction, map construction, and kernel
/// application.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    /// A feature dimension is odd, zero, or otherwise unusable for the
    /// requested pairing mode.
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: String },

    /// Tensor shapes, table widths, or map widths do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An angle table was built for a different mode or axis split than the
    /// map it is being used with.
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    /// A pipeline or frequency configuration value is out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, KernelError>;

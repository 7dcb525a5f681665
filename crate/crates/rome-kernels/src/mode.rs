//! Pairing modes: the four conventions for grouping feature dimensions into
//! rotated 2D pairs.

use crate::error::{KernelError, Result};

/// How feature dimensions are grouped into 2D pairs before rotation.
///
/// * `Half` — pairs `(x_i, x_{i+d/2})`: the vector is split into two equal
///   halves.
/// * `Interleave` — adjacent pairs `(x_{2i}, x_{2i+1})`.
/// * `InterleaveHalf` — even-indexed dims are moved to the front, odd to the
///   back, then the half recipe is applied in that permuted basis.
/// * `Quarter` — the half pattern applied independently inside each half:
///   pairs `(q1, q2)` and `(q3, q4)` of the four quarter chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairingMode {
    Half,
    Interleave,
    InterleaveHalf,
    Quarter,
}

impl PairingMode {
    pub const ALL: [PairingMode; 4] = [
        PairingMode::Half,
        PairingMode::Interleave,
        PairingMode::InterleaveHalf,
        PairingMode::Quarter,
    ];

    /// Check that a feature width is usable with this mode: even everywhere,
    /// and a multiple of 4 for quarter.
    pub fn validate_dim(self, d: usize) -> Result<()> {
        if d == 0 || !d.is_multiple_of(2) {
            return Err(KernelError::InvalidDimension {
                dim: d,
                reason: "feature width must be even and positive".into(),
            });
        }
        if self == PairingMode::Quarter && !d.is_multiple_of(4) {
            return Err(KernelError::InvalidDimension {
                dim: d,
                reason: "quarter mode needs a width divisible by 4".into(),
            });
        }
        Ok(())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairingMode::Half => "half",
            PairingMode::Interleave => "interleave",
            PairingMode::InterleaveHalf => "interleave-half",
            PairingMode::Quarter => "quarter",
        }
    }
}

impl std::fmt::Display for PairingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PairingMode {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(PairingMode::Half),
            "interleave" => Ok(PairingMode::Interleave),
            "interleave-half" | "interleave_half" => Ok(PairingMode::InterleaveHalf),
            "quarter" => Ok(PairingMode::Quarter),
            other => Err(KernelError::InvalidConfig(format!(
                "unknown pairing mode '{other}' (expected half, interleave, interleave-half, quarter)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_validation_per_mode() {
        assert!(PairingMode::Half.validate_dim(2).is_ok());
        assert!(PairingMode::Half.validate_dim(3).is_err());
        assert!(PairingMode::Half.validate_dim(0).is_err());
        assert!(PairingMode::Quarter.validate_dim(8).is_ok());
        assert!(PairingMode::Quarter.validate_dim(6).is_err());
        assert!(PairingMode::InterleaveHalf.validate_dim(44).is_ok());
    }

    #[test]
    fn parse_round_trip() {
        for mode in PairingMode::ALL {
            assert_eq!(mode.as_str().parse::<PairingMode>().unwrap(), mode);
        }
        assert!("diagonal".parse::<PairingMode>().is_err());
    }
}

//! Signed-permutation maps: the structured matrix `M` with `x_new = M x`.
//!
//! `M` has exactly one nonzero (±1) per row and column, so it is stored as a
//! gather (`src`) plus a sign per output slot and applied in one contiguous
//! pass. It is never densified in the hot path; the dense form lives in the
//! oracle and the matmul benchmark arm.
//!
//! For half, interleave, and quarter (and any block-diagonal composition of
//! them) `M` is a rotation generator: `MᵀM = I` and `M² = -I`, both exact
//! over integers. Interleave-half is not expressible as a single `M`; it
//! uses the two-map extension (`ExtensionMaps`).

use crate::error::{KernelError, Result};
use crate::mode::PairingMode;
use crate::tensor::{Element, Tensor};

/// Sign convention for the rotated component.
///
/// `Standard` matches the split/merge recipes (pair `(a, b)` becomes
/// `(a cosθ - b sinθ, b cosθ + a sinθ)`, a counter-clockwise rotation).
/// `Flipped` is the global sign flip `M -> -M`, which rotates by `-θ`. Some
/// texts print the generator with the opposite sign; the two conventions are
/// distinguishable only through the sign of the sin terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConvention {
    Standard,
    Flipped,
}

/// A signed permutation: output `j` reads `sign[j] · x[src[j]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredMap {
    src: Vec<usize>,
    sign: Vec<i8>,
    /// Pairing mode this map realizes, when built by a mode constructor.
    /// Used to validate map/table pairings; `None` for derived maps.
    mode: Option<PairingMode>,
    /// Axis split this map was built for; empty for derived maps.
    dims: Vec<usize>,
}

impl StructuredMap {
    fn from_parts(src: Vec<usize>, sign: Vec<i8>) -> Self {
        debug_assert_eq!(src.len(), sign.len());
        debug_assert!(sign.iter().all(|&s| s == 1 || s == -1));
        Self {
            src,
            sign,
            mode: None,
            dims: Vec::new(),
        }
    }

    /// Width `d` of the map.
    pub fn width(&self) -> usize {
        self.src.len()
    }

    /// Input index read by output slot `j`.
    pub fn src(&self) -> &[usize] {
        &self.src
    }

    /// Sign applied at output slot `j` (+1 or -1).
    pub fn sign(&self) -> &[i8] {
        &self.sign
    }

    pub fn mode(&self) -> Option<PairingMode> {
        self.mode
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Global sign flip `M -> -M`: the opposite rotation direction.
    pub fn negated(&self) -> Self {
        Self {
            src: self.src.clone(),
            sign: self.sign.iter().map(|&s| -s).collect(),
            mode: self.mode,
            dims: self.dims.clone(),
        }
    }

    /// Transpose (inverse, since the map is orthogonal): if `out[j]`
    /// reads `sign[j]·x[src[j]]`, the transpose writes `out[src[j]] =
    /// sign[j]·x[j]`.
    pub fn transpose(&self) -> Self {
        let d = self.width();
        let mut src = vec![0usize; d];
        let mut sign = vec![0i8; d];
        for j in 0..d {
            src[self.src[j]] = j;
            sign[self.src[j]] = self.sign[j];
        }
        let mut t = Self::from_parts(src, sign);
        t.mode = self.mode;
        t.dims = self.dims.clone();
        t
    }

    /// Composition `self ∘ other`, i.e. the map computing `self(other(x))`
    /// (matrix product `Self · Other`).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.width() != other.width() {
            return Err(KernelError::ShapeMismatch(format!(
                "cannot compose maps of widths {} and {}",
                self.width(),
                other.width()
            )));
        }
        let d = self.width();
        let mut src = Vec::with_capacity(d);
        let mut sign = Vec::with_capacity(d);
        for j in 0..d {
            let mid = self.src[j];
            src.push(other.src[mid]);
            sign.push(self.sign[j] * other.sign[mid]);
        }
        Ok(Self::from_parts(src, sign))
    }

    /// Block-diagonal concatenation of maps.
    pub fn block_diag(blocks: &[Self]) -> Self {
        let d: usize = blocks.iter().map(Self::width).sum();
        let mut src = Vec::with_capacity(d);
        let mut sign = Vec::with_capacity(d);
        let mut offset = 0;
        for b in blocks {
            src.extend(b.src.iter().map(|&i| i + offset));
            sign.extend_from_slice(&b.sign);
            offset += b.width();
        }
        Self::from_parts(src, sign)
    }

    /// True when `src` visits every input exactly once.
    pub fn is_permutation(&self) -> bool {
        let d = self.width();
        let mut seen = vec![false; d];
        for &i in &self.src {
            if i >= d || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }

    /// Error unless the map was built for feature width `d`.
    pub fn check_width(&self, d: usize) -> Result<()> {
        if self.width() != d {
            return Err(KernelError::ShapeMismatch(format!(
                "map width {} does not match feature width {}",
                self.width(),
                d
            )));
        }
        Ok(())
    }

    /// Validate that an angle table was expanded for this map.
    pub(crate) fn check_table(&self, mode: PairingMode, dims: &[usize]) -> Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(KernelError::ModeMismatch(format!(
                    "map built for {m} used with a {mode} angle table"
                )));
            }
        }
        if !self.dims.is_empty() && self.dims != dims {
            return Err(KernelError::ModeMismatch(format!(
                "map built for axis split {:?} used with a table for {:?}",
                self.dims, dims
            )));
        }
        Ok(())
    }
}

/// One-axis generator for a rotation-generator mode.
fn generator_1d(mode: PairingMode, d: usize) -> Result<StructuredMap> {
    mode.validate_dim(d)?;
    let half = d / 2;
    let mut src = Vec::with_capacity(d);
    let mut sign = Vec::with_capacity(d);
    match mode {
        // x_new = [-x_{d/2..}, x_{..d/2}]
        PairingMode::Half => {
            for j in 0..half {
                src.push(j + half);
                sign.push(-1);
            }
            for j in 0..half {
                src.push(j);
                sign.push(1);
            }
        }
        // x_new per adjacent pair = [-odd, even]
        PairingMode::Interleave => {
            for i in 0..half {
                src.push(2 * i + 1);
                sign.push(-1);
                src.push(2 * i);
                sign.push(1);
            }
        }
        // x_new = [-q2, q1, -q4, q3]
        PairingMode::Quarter => {
            let quarter = d / 4;
            for block in 0..2 {
                let base = block * half;
                for j in 0..quarter {
                    src.push(base + quarter + j);
                    sign.push(-1);
                }
                for j in 0..quarter {
                    src.push(base + j);
                    sign.push(1);
                }
            }
        }
        PairingMode::InterleaveHalf => {
            return Err(KernelError::ModeMismatch(
                "interleave-half has no single rotation generator; use build_extension_maps".into(),
            ))
        }
    }
    Ok(StructuredMap::from_parts(src, sign))
}

/// Build `M` for a mode across one or more axis blocks: the block-diagonal
/// composition of the per-axis generators. For interleave the result is
/// identical to the single-axis map of the full width, because the 2x2
/// generators tile uniformly across block boundaries.
pub fn build_m(mode: PairingMode, dims: &[usize]) -> Result<StructuredMap> {
    if dims.is_empty() {
        return Err(KernelError::InvalidConfig("no feature axes given".into()));
    }
    let blocks: Vec<StructuredMap> = dims
        .iter()
        .map(|&d| generator_1d(mode, d))
        .collect::<Result<_>>()?;
    let mut map = StructuredMap::block_diag(&blocks);
    map.mode = Some(mode);
    map.dims = dims.to_vec();
    Ok(map)
}

/// The two maps of the interleave-half extension:
/// `out = cos ⊙ (M₁x) + sin ⊙ (M₂x)`.
///
/// `M₁` is the evens-first permutation (all signs +1); `M₂ = M_half · M₁`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionMaps {
    pub m1: StructuredMap,
    pub m2: StructuredMap,
    dims: Vec<usize>,
}

impl ExtensionMaps {
    pub fn width(&self) -> usize {
        self.m1.width()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub(crate) fn check_table(&self, mode: PairingMode, dims: &[usize]) -> Result<()> {
        if mode != PairingMode::InterleaveHalf {
            return Err(KernelError::ModeMismatch(format!(
                "extension maps used with a {mode} angle table"
            )));
        }
        if self.dims != dims {
            return Err(KernelError::ModeMismatch(format!(
                "extension maps built for axis split {:?} used with a table for {:?}",
                self.dims, dims
            )));
        }
        Ok(())
    }
}

fn extension_1d(d: usize) -> Result<(StructuredMap, StructuredMap)> {
    PairingMode::InterleaveHalf.validate_dim(d)?;
    let half = d / 2;
    let mut m1_src = Vec::with_capacity(d);
    let mut m2_src = Vec::with_capacity(d);
    let mut m2_sign = Vec::with_capacity(d);
    for j in 0..half {
        m1_src.push(2 * j); // evens first
        m2_src.push(2 * j + 1);
        m2_sign.push(-1);
    }
    for j in 0..half {
        m1_src.push(2 * j + 1); // odds second
        m2_src.push(2 * j);
        m2_sign.push(1);
    }
    Ok((
        StructuredMap::from_parts(m1_src, vec![1; d]),
        StructuredMap::from_parts(m2_src, m2_sign),
    ))
}

/// Extension maps for a single axis of width `d`.
pub fn build_extension_maps(d: usize) -> Result<ExtensionMaps> {
    build_extension_maps_nd(&[d])
}

/// Extension maps across axis blocks: block-diagonal composition of the
/// per-axis `M₁`/`M₂` pairs.
pub fn build_extension_maps_nd(dims: &[usize]) -> Result<ExtensionMaps> {
    if dims.is_empty() {
        return Err(KernelError::InvalidConfig("no feature axes given".into()));
    }
    let mut m1_blocks = Vec::with_capacity(dims.len());
    let mut m2_blocks = Vec::with_capacity(dims.len());
    for &d in dims {
        let (m1, m2) = extension_1d(d)?;
        m1_blocks.push(m1);
        m2_blocks.push(m2);
    }
    let mut m1 = StructuredMap::block_diag(&m1_blocks);
    let mut m2 = StructuredMap::block_diag(&m2_blocks);
    m1.mode = Some(PairingMode::InterleaveHalf);
    m2.mode = Some(PairingMode::InterleaveHalf);
    m1.dims = dims.to_vec();
    m2.dims = dims.to_vec();
    Ok(ExtensionMaps {
        m1,
        m2,
        dims: dims.to_vec(),
    })
}

/// Apply the map to every row: `out[r][j] = sign[j] · x[r][src[j]]`.
/// One contiguous pass, no intermediate split buffers.
pub fn apply_structured<T: Element>(map: &StructuredMap, x: &Tensor<T>) -> Result<Tensor<T>> {
    map.check_width(x.width())?;
    let mut out = Tensor::zeros(x.shape().to_vec());
    apply_structured_into(map, x.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// Gather rows of `x` through the map into `out` (same length, row width =
/// `map.width()`). Shared by the tensor-level entry point and the pipeline's
/// per-tile stage.
pub(crate) fn apply_structured_into<T: Element>(map: &StructuredMap, x: &[T], out: &mut [T]) {
    let d = map.width();
    debug_assert_eq!(x.len(), out.len());
    debug_assert_eq!(x.len() % d, 0);
    for (row, out_row) in x.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
        for j in 0..d {
            let v = row[map.src[j]];
            out_row[j] = if map.sign[j] < 0 { -v } else { v };
        }
    }
}

//! Rotation angles: frequency vectors, per-position angle tables, and the
//! mode-dependent expansion of `d/2` angles into width-`d` cos/sin tables.
//!
//! Angles and trig are always evaluated in f64; only the final cos/sin
//! tables are downcast to the working element type. Computing `θ = p·ω` in
//! f32 loses up to ~1e-3 rad of phase at realistic sequence lengths, which
//! would dwarf the rotation itself at high frequencies.
//!
//! The expansion layout is what makes `out = cos ⊙ x + sin ⊙ x_new` exact
//! per element: both members of pair `i` must carry `cos θ_i` / `sin θ_i`.
//! For a single axis of width `d` with angles `c_0..c_{d/2-1}`:
//!
//! * half, interleave-half: `[c_0..c_{d/2-1}, c_0..c_{d/2-1}]`
//! * interleave: `[c_0, c_0, c_1, c_1, ...]`
//! * quarter: the half layout inside each half:
//!   `[c_0..c_{d/4-1}] x2, [c_{d/4}..c_{d/2-1}] x2`
//!
//! Multi-axis tables apply the layout independently inside each axis block.

use crate::error::{KernelError, Result};
use crate::mode::PairingMode;
use crate::tensor::{cast, Element, Tensor};

/// Frequency vector `ω_i = base^(-2(i-1)/d)` for `i = 1..d/2`.
///
/// Strictly decreasing whenever `base > 1`; `ω_1` is always exactly 1.
pub fn frequencies(d: usize, base: f64) -> Result<Vec<f64>> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(KernelError::InvalidDimension {
            dim: d,
            reason: "frequency vector needs an even width of at least 2".into(),
        });
    }
    if base.is_nan() || base <= 0.0 {
        return Err(KernelError::InvalidConfig(format!(
            "frequency base must be positive, got {base}"
        )));
    }
    Ok((0..d / 2)
        .map(|i| base.powf(-2.0 * i as f64 / d as f64))
        .collect())
}

/// Frequency layout across one or more feature axes.
///
/// `per_axis_dims` lists the even sub-widths `[d_1..d_n]` with `Σ d_i = D`;
/// a singleton `[D]` is the plain 1D case.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSpec {
    pub base: f64,
    pub per_axis_dims: Vec<usize>,
}

impl FreqSpec {
    pub const DEFAULT_BASE: f64 = 10_000.0;

    pub fn new(base: f64, per_axis_dims: Vec<usize>) -> Result<Self> {
        if base.is_nan() || base <= 0.0 {
            return Err(KernelError::InvalidConfig(format!(
                "frequency base must be positive, got {base}"
            )));
        }
        if per_axis_dims.is_empty() {
            return Err(KernelError::InvalidConfig("no feature axes given".into()));
        }
        for &d in &per_axis_dims {
            if d < 2 || d % 2 != 0 {
                return Err(KernelError::InvalidDimension {
                    dim: d,
                    reason: "every per-axis width must be even and positive".into(),
                });
            }
        }
        Ok(Self {
            base,
            per_axis_dims,
        })
    }

    pub fn one_dim(d: usize) -> Result<Self> {
        Self::new(Self::DEFAULT_BASE, vec![d])
    }

    /// Total feature width `D = Σ d_i`.
    pub fn total_dim(&self) -> usize {
        self.per_axis_dims.iter().sum()
    }

    /// One frequency vector per axis, each of length `d_i / 2`.
    pub fn frequencies_per_axis(&self) -> Result<Vec<Vec<f64>>> {
        self.per_axis_dims
            .iter()
            .map(|&d| frequencies(d, self.base))
            .collect()
    }
}

/// Angle table `θ[s][i] = positions[s] · freqs[i]`, shape `[S, d/2]`.
///
/// Positions are plain integers; shifts and negative positions are allowed.
pub fn angle_table_1d(positions: &[i64], freqs: &[f64]) -> Tensor<f64> {
    let mut data = Vec::with_capacity(positions.len() * freqs.len());
    for &p in positions {
        for &w in freqs {
            data.push(p as f64 * w);
        }
    }
    Tensor::new(vec![positions.len(), freqs.len()], data).expect("consistent by construction")
}

/// Multi-axis angle table: row `s` is the concatenation over axes of that
/// axis's 1D angles at `grids[a][s]`. Shape `[S, D/2]`.
pub fn angle_table_nd(grids: &[Vec<i64>], spec: &FreqSpec) -> Result<Tensor<f64>> {
    if grids.len() != spec.per_axis_dims.len() {
        return Err(KernelError::ShapeMismatch(format!(
            "{} position grids for {} feature axes",
            grids.len(),
            spec.per_axis_dims.len()
        )));
    }
    let s_len = grids.first().map_or(0, Vec::len);
    if grids.iter().any(|g| g.len() != s_len) {
        return Err(KernelError::ShapeMismatch(
            "position grids have differing lengths".into(),
        ));
    }
    let per_axis_freqs = spec.frequencies_per_axis()?;
    let half_d = spec.total_dim() / 2;
    let mut data = Vec::with_capacity(s_len * half_d);
    for s in 0..s_len {
        for (grid, freqs) in grids.iter().zip(&per_axis_freqs) {
            let p = grid[s] as f64;
            data.extend(freqs.iter().map(|&w| p * w));
        }
    }
    Tensor::new(vec![s_len, half_d], data)
}

/// Position grids for a volume with the given axis sizes, flattened with the
/// first axis outermost (t-major for `[T, H, W]`). Returns one grid per axis,
/// each of length `product(sizes)`.
pub fn volume_grids(sizes: &[usize]) -> Vec<Vec<i64>> {
    let total: usize = sizes.iter().product();
    let mut grids = vec![Vec::with_capacity(total); sizes.len()];
    for flat in 0..total {
        let mut rem = flat;
        for (a, &size) in sizes.iter().enumerate().rev() {
            grids[a].push((rem % size) as i64);
            rem /= size;
        }
    }
    // Digits were produced innermost-first per flat index; each grid is
    // already in flat order because we push exactly once per index.
    grids
}

/// For output slot `j` inside one axis block of width `block_d`, the index of
/// the angle (within that block's `block_d/2` angles) that slot carries.
pub(crate) fn angle_index_in_block(mode: PairingMode, block_d: usize, j: usize) -> usize {
    match mode {
        PairingMode::Half | PairingMode::InterleaveHalf => j % (block_d / 2),
        PairingMode::Interleave => j / 2,
        PairingMode::Quarter => {
            let half = block_d / 2;
            let quarter = block_d / 4;
            (j / half) * quarter + (j % half) % quarter
        }
    }
}

/// Global angle column carried by each of the `D` output slots, across axis
/// blocks. Slot `j` of the expanded tables reads `theta[s][slots[j]]`.
pub(crate) fn angle_slot_indices(mode: PairingMode, dims: &[usize]) -> Vec<usize> {
    let d: usize = dims.iter().sum();
    let mut slots = Vec::with_capacity(d);
    let mut angle_offset = 0;
    for &block_d in dims {
        for j in 0..block_d {
            slots.push(angle_offset + angle_index_in_block(mode, block_d, j));
        }
        angle_offset += block_d / 2;
    }
    slots
}

/// Expand a `[S, D/2]` angle table into width-`D` cos/sin tables for a
/// single-axis layout.
pub fn expand_cos_sin<T: Element>(
    theta: &Tensor<f64>,
    mode: PairingMode,
) -> Result<(Vec<T>, Vec<T>)> {
    expand_cos_sin_nd(theta, mode, &[theta.width() * 2])
}

/// Expand a `[S, D/2]` angle table into width-`D` cos/sin tables, applying
/// the mode's layout independently inside each axis block of `dims`.
pub fn expand_cos_sin_nd<T: Element>(
    theta: &Tensor<f64>,
    mode: PairingMode,
    dims: &[usize],
) -> Result<(Vec<T>, Vec<T>)> {
    let d: usize = dims.iter().sum();
    for &dim in dims {
        mode.validate_dim(dim)?;
    }
    if theta.width() * 2 != d {
        return Err(KernelError::ShapeMismatch(format!(
            "angle table width {} does not match D/2 = {}",
            theta.width(),
            d / 2
        )));
    }
    let slots = angle_slot_indices(mode, dims);
    let s_len = theta.num_rows();
    let mut cos_d = Vec::with_capacity(s_len * d);
    let mut sin_d = Vec::with_capacity(s_len * d);
    for row in theta.rows() {
        for &slot in &slots {
            let a = row[slot];
            cos_d.push(cast::<T>(a.cos()));
            sin_d.push(cast::<T>(a.sin()));
        }
    }
    Ok((cos_d, sin_d))
}

/// Precomputed rotation tables for a fixed set of positions.
///
/// Holds the raw `[S, D/2]` angles (f64, reused by the dense oracle) plus the
/// mode-expanded `[S, D]` cos/sin tables in working precision. Kernels never
/// call trig in their hot loops; they read these tables.
#[derive(Debug, Clone)]
pub struct AngleTable<T> {
    mode: PairingMode,
    dims: Vec<usize>,
    positions: usize,
    d: usize,
    theta: Tensor<f64>,
    cos_d: Vec<T>,
    sin_d: Vec<T>,
}

impl<T: Element> AngleTable<T> {
    /// Expand a prebuilt `[S, D/2]` angle table for `mode` over axis blocks
    /// `dims` (use `[D]` for the 1D case).
    pub fn build(theta: Tensor<f64>, mode: PairingMode, dims: &[usize]) -> Result<Self> {
        let (cos_d, sin_d) = expand_cos_sin_nd(&theta, mode, dims)?;
        Ok(Self {
            mode,
            dims: dims.to_vec(),
            positions: theta.num_rows(),
            d: dims.iter().sum(),
            theta,
            cos_d,
            sin_d,
        })
    }

    /// 1D table for integer positions with the default frequency formula.
    pub fn for_positions(
        positions: &[i64],
        d: usize,
        base: f64,
        mode: PairingMode,
    ) -> Result<Self> {
        mode.validate_dim(d)?;
        let freqs = frequencies(d, base)?;
        Self::build(angle_table_1d(positions, &freqs), mode, &[d])
    }

    /// Multi-axis table for per-axis position grids.
    pub fn for_grids(grids: &[Vec<i64>], spec: &FreqSpec, mode: PairingMode) -> Result<Self> {
        let theta = angle_table_nd(grids, spec)?;
        Self::build(theta, mode, &spec.per_axis_dims)
    }

    pub fn mode(&self) -> PairingMode {
        self.mode
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of positions `S`.
    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Feature width `D`.
    pub fn width(&self) -> usize {
        self.d
    }

    /// Raw angles, shape `[S, D/2]`.
    pub fn theta(&self) -> &Tensor<f64> {
        &self.theta
    }

    /// Width-`D` cosine row for position `s`.
    pub fn cos_row(&self, s: usize) -> &[T] {
        &self.cos_d[s * self.d..(s + 1) * self.d]
    }

    /// Width-`D` sine row for position `s`.
    pub fn sin_row(&self, s: usize) -> &[T] {
        &self.sin_d[s * self.d..(s + 1) * self.d]
    }
}

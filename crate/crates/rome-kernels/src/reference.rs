//! Baseline split/rotate/merge rotary embedding.
//!
//! These functions follow the literal chunk/rearrange/cat recipes of the
//! four pairing modes, materializing every intermediate (split halves,
//! `x_new`) in fresh buffers and combining in three separate elementwise
//! passes — the memory-movement profile of a multi-kernel implementation.
//! They are the timing baseline and the equivalence target for the
//! structured-matrix path.

use crate::angles::AngleTable;
use crate::error::{KernelError, Result};
use crate::mode::PairingMode;
use crate::tensor::{Element, Tensor};

fn check_args<T: Element>(x: &Tensor<T>, angles: &AngleTable<T>, mode: PairingMode) -> Result<()> {
    if angles.mode() != mode {
        return Err(KernelError::ModeMismatch(format!(
            "angle table built for {}, requested {}",
            angles.mode(),
            mode
        )));
    }
    if angles.dims() != [x.width()] {
        return Err(KernelError::ModeMismatch(format!(
            "angle table expanded for axis split {:?}; the single-axis reference needs [{}]",
            angles.dims(),
            x.width()
        )));
    }
    mode.validate_dim(x.width())?;
    x.check_rotary_layout(x.width(), angles.positions())
}

/// The `merge`d rotation operand: a fresh buffer holding `x_new` for the
/// mode, built from materialized split chunks exactly as the recipes do.
fn materialize_x_new<T: Element>(x: &Tensor<T>, mode: PairingMode) -> Vec<T> {
    let d = x.width();
    let half = d / 2;
    let rows = x.num_rows();
    let mut x_new = Vec::with_capacity(rows * d);
    match mode {
        PairingMode::Half => {
            // x1, x2 = chunk(x, 2); x_new = cat(-x2, x1)
            let mut x1 = Vec::with_capacity(rows * half);
            let mut x2 = Vec::with_capacity(rows * half);
            for row in x.rows() {
                x1.extend_from_slice(&row[..half]);
                x2.extend_from_slice(&row[half..]);
            }
            for r in 0..rows {
                x_new.extend(x2[r * half..(r + 1) * half].iter().map(|&v| -v));
                x_new.extend_from_slice(&x1[r * half..(r + 1) * half]);
            }
        }
        PairingMode::Interleave => {
            // rearrange into pairs; chunk; cat(-odds, evens); flatten
            let (evens, odds) = split_even_odd(x);
            for r in 0..rows {
                for i in 0..half {
                    x_new.push(-odds[r * half + i]);
                    x_new.push(evens[r * half + i]);
                }
            }
        }
        PairingMode::InterleaveHalf => {
            // evens-first permutation, then the half recipe in that basis
            let (evens, odds) = split_even_odd(x);
            for r in 0..rows {
                x_new.extend(odds[r * half..(r + 1) * half].iter().map(|&v| -v));
                x_new.extend_from_slice(&evens[r * half..(r + 1) * half]);
            }
        }
        PairingMode::Quarter => {
            // q1..q4 = chunk(x, 4); x_new = cat(-q2, q1, -q4, q3)
            let q = d / 4;
            let mut chunks: Vec<Vec<T>> = (0..4).map(|_| Vec::with_capacity(rows * q)).collect();
            for row in x.rows() {
                for (c, chunk) in chunks.iter_mut().enumerate() {
                    chunk.extend_from_slice(&row[c * q..(c + 1) * q]);
                }
            }
            for r in 0..rows {
                let span = r * q..(r + 1) * q;
                x_new.extend(chunks[1][span.clone()].iter().map(|&v| -v));
                x_new.extend_from_slice(&chunks[0][span.clone()]);
                x_new.extend(chunks[3][span.clone()].iter().map(|&v| -v));
                x_new.extend_from_slice(&chunks[2][span]);
            }
        }
    }
    x_new
}

fn split_even_odd<T: Element>(x: &Tensor<T>) -> (Vec<T>, Vec<T>) {
    let half = x.width() / 2;
    let rows = x.num_rows();
    let mut evens = Vec::with_capacity(rows * half);
    let mut odds = Vec::with_capacity(rows * half);
    for row in x.rows() {
        evens.extend(row.iter().step_by(2));
        odds.extend(row.iter().skip(1).step_by(2));
    }
    (evens, odds)
}

/// Unfused `cos ⊙ a + sin ⊙ b`: two multiply passes into fresh buffers and
/// one add pass, each walking full tensors, as separate kernels would.
fn unfused_combine<T: Element>(a: &[T], b: &[T], angles: &AngleTable<T>, d: usize) -> Vec<T> {
    let s_len = angles.positions();
    let rows = a.len() / d;
    let mut t1 = Vec::with_capacity(rows * d);
    for r in 0..rows {
        let cos = angles.cos_row(r % s_len);
        t1.extend(a[r * d..(r + 1) * d].iter().zip(cos).map(|(&v, &c)| v * c));
    }
    let mut t2 = Vec::with_capacity(rows * d);
    for r in 0..rows {
        let sin = angles.sin_row(r % s_len);
        t2.extend(b[r * d..(r + 1) * d].iter().zip(sin).map(|(&v, &s)| v * s));
    }
    t1.iter().zip(&t2).map(|(&u, &v)| u + v).collect()
}

/// Split/rotate/merge rotary embedding for one feature axis.
///
/// For interleave-half the output lives in the evens-first permuted basis,
/// exactly as the recipe computes it; consumers needing the original basis
/// must apply the inverse permutation themselves.
pub fn rope_reference<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    mode: PairingMode,
) -> Result<Tensor<T>> {
    check_args(x, angles, mode)?;
    let d = x.width();
    let x_new = materialize_x_new(x, mode);
    let carrier: Vec<T>;
    let cos_operand: &[T] = if mode == PairingMode::InterleaveHalf {
        // the recipe reassigns x to the permuted layout before combining
        let (evens, odds) = split_even_odd(x);
        let half = d / 2;
        let rows = x.num_rows();
        let mut y = Vec::with_capacity(rows * d);
        for r in 0..rows {
            y.extend_from_slice(&evens[r * half..(r + 1) * half]);
            y.extend_from_slice(&odds[r * half..(r + 1) * half]);
        }
        carrier = y;
        &carrier
    } else {
        x.as_slice()
    };
    let out = unfused_combine(cos_operand, &x_new, angles, d);
    Tensor::new(x.shape().to_vec(), out)
}

/// Factorized multi-axis rotary embedding: split the feature axis into
/// `dims` slabs, apply `rope_reference` per slab with that axis's table,
/// concatenate. Deliberately pays the real slicing and concatenation cost.
pub fn rope_reference_nd<T: Element>(
    x: &Tensor<T>,
    per_axis_angles: &[AngleTable<T>],
    dims: &[usize],
    mode: PairingMode,
) -> Result<Tensor<T>> {
    let d: usize = dims.iter().sum();
    if d != x.width() {
        return Err(KernelError::ShapeMismatch(format!(
            "axis widths {:?} sum to {}, tensor width is {}",
            dims,
            d,
            x.width()
        )));
    }
    if per_axis_angles.len() != dims.len() {
        return Err(KernelError::ShapeMismatch(format!(
            "{} angle tables for {} axes",
            per_axis_angles.len(),
            dims.len()
        )));
    }
    let rows = x.num_rows();
    let mut outputs = Vec::with_capacity(dims.len());
    let mut offset = 0;
    for (&axis_d, table) in dims.iter().zip(per_axis_angles) {
        // real slicing cost: each slab is a fresh buffer
        let mut slab = Vec::with_capacity(rows * axis_d);
        for row in x.rows() {
            slab.extend_from_slice(&row[offset..offset + axis_d]);
        }
        let slab = Tensor::new(vec![rows, axis_d], slab)?;
        outputs.push(rope_reference(&slab, table, mode)?);
        offset += axis_d;
    }
    let mut merged = Vec::with_capacity(rows * d);
    for r in 0..rows {
        for out in &outputs {
            merged.extend_from_slice(out.row(r));
        }
    }
    Tensor::new(x.shape().to_vec(), merged)
}

//! Dense rotation oracle: the ground-truth path.
//!
//! Builds the full `d x d` rotation `R = diag(cos) + diag(sin)·M` per
//! position and applies it by naive dense matrix product, always in f64.
//! This is a correctness instrument first and the quadratic benchmark arm
//! second; it costs Θ(S·D²) multiply-adds against Θ(S·D) for the structured
//! path.

use crate::angles::angle_slot_indices;
use crate::error::{KernelError, Result};
use crate::mode::PairingMode;
use crate::structured::{build_extension_maps_nd, build_m, StructuredMap};
use crate::tensor::{cast, Element, Tensor};
use num_traits::NumCast;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    d: usize,
    entries: Vec<T>,
}

impl<T: Element> DenseMatrix<T> {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            entries: vec![T::zero(); d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.entries[i * d + i] = T::one();
        }
        m
    }

    pub fn width(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.d + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.entries[row * self.d + col] = value;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.d..(row + 1) * self.d]
    }

    /// Naive dense matrix-vector product `out = A x`.
    pub fn matvec(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(out.len(), self.d);
        for (j, o) in out.iter_mut().enumerate() {
            let row = self.row(j);
            let mut acc = T::zero();
            for k in 0..self.d {
                acc = acc + row[k] * x[k];
            }
            *o = acc;
        }
    }

    /// Naive dense matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.d, other.d);
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(&a, &b)| {
                let a: f64 = NumCast::from(a).expect("element -> f64");
                let b: f64 = NumCast::from(b).expect("element -> f64");
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Determinant via LU with partial pivoting, computed in f64. Intended
    /// for small widths (orthogonality spot checks), not general algebra.
    pub fn determinant(&self) -> f64 {
        let d = self.d;
        let mut lu: Vec<f64> = self
            .entries
            .iter()
            .map(|&v| NumCast::from(v).expect("element -> f64"))
            .collect();
        let mut det = 1.0f64;
        for col in 0..d {
            let mut pivot = col;
            for r in col + 1..d {
                if lu[r * d + col].abs() > lu[pivot * d + col].abs() {
                    pivot = r;
                }
            }
            if lu[pivot * d + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..d {
                    lu.swap(col * d + j, pivot * d + j);
                }
                det = -det;
            }
            let diag = lu[col * d + col];
            det *= diag;
            for r in col + 1..d {
                let factor = lu[r * d + col] / diag;
                for j in col..d {
                    lu[r * d + j] -= factor * lu[col * d + j];
                }
            }
        }
        det
    }
}

/// Materialize a structured map: `entries[j][src[j]] = sign[j]`, zero
/// elsewhere.
pub fn densify<T: Element>(map: &StructuredMap) -> DenseMatrix<T> {
    let d = map.width();
    let mut m = DenseMatrix::zeros(d);
    for j in 0..d {
        let s = if map.sign()[j] < 0 {
            -T::one()
        } else {
            T::one()
        };
        m.set(j, map.src()[j], s);
    }
    m
}

/// Dense rotation for one position: `R = diag(cos) + diag(sin)·M`, built in
/// f64 with the mode's expansion layout. For interleave-half the rotation
/// acts in the permuted basis: `R = diag(cos)·M₁ + diag(sin)·M₂`.
pub fn build_r(theta_row: &[f64], mode: PairingMode, dims: &[usize]) -> Result<DenseMatrix<f64>> {
    let d: usize = dims.iter().sum();
    if theta_row.len() * 2 != d {
        return Err(KernelError::ShapeMismatch(format!(
            "theta row has {} angles for width {}",
            theta_row.len(),
            d
        )));
    }
    let slots = angle_slot_indices(mode, dims);
    let mut r = DenseMatrix::zeros(d);
    match mode {
        PairingMode::InterleaveHalf => {
            let ext = build_extension_maps_nd(dims)?;
            for j in 0..d {
                let a = theta_row[slots[j]];
                r.set(j, ext.m1.src()[j], a.cos());
                let s = if ext.m2.sign()[j] < 0 {
                    -a.sin()
                } else {
                    a.sin()
                };
                let prev = r.get(j, ext.m2.src()[j]);
                r.set(j, ext.m2.src()[j], prev + s);
            }
        }
        _ => {
            let map = build_m(mode, dims)?;
            for j in 0..d {
                let a = theta_row[slots[j]];
                r.set(j, j, a.cos());
                let s = if map.sign()[j] < 0 { -a.sin() } else { a.sin() };
                let prev = r.get(j, map.src()[j]);
                r.set(j, map.src()[j], prev + s);
            }
        }
    }
    Ok(r)
}

/// Ground-truth rotary application: `out[r] = R(θ_{r mod S}) · x[r]`,
/// computed entirely in f64 and downcast at the end.
pub fn oracle_forward<T: Element>(
    x: &Tensor<T>,
    thetas: &Tensor<f64>,
    mode: PairingMode,
    dims: &[usize],
) -> Result<Tensor<T>> {
    Ok(oracle_forward_counted(x, thetas, mode, dims)?.0)
}

/// `oracle_forward` plus the number of multiply-add operations actually
/// executed in the dense inner loop. Used to assert the Θ(S·D²) vs Θ(S·D)
/// cost asymmetry without touching wall clocks.
pub fn oracle_forward_counted<T: Element>(
    x: &Tensor<T>,
    thetas: &Tensor<f64>,
    mode: PairingMode,
    dims: &[usize],
) -> Result<(Tensor<T>, u64)> {
    let d: usize = dims.iter().sum();
    let s_len = thetas.num_rows();
    if thetas.width() * 2 != d {
        return Err(KernelError::ShapeMismatch(format!(
            "theta table width {} does not match D/2 = {}",
            thetas.width(),
            d / 2
        )));
    }
    x.check_rotary_layout(d, s_len)?;

    let mut out = Tensor::zeros(x.shape().to_vec());
    let out_slice = out.as_mut_slice();
    let x_slice = x.as_slice();
    let mut x64 = vec![0.0f64; d];
    let mut y64 = vec![0.0f64; d];
    let mut madds: u64 = 0;

    // Deliberately naive: rebuild the dense rotation for every row. This is
    // a correctness instrument and the quadratic benchmark arm, not a
    // performance contender.
    for row in 0..x.num_rows() {
        let rot = build_r(thetas.row(row % s_len), mode, dims)?;
        let base = row * d;
        for (dst, &v) in x64.iter_mut().zip(&x_slice[base..base + d]) {
            *dst = NumCast::from(v).expect("element -> f64");
        }
        rot.matvec(&x64, &mut y64);
        madds += (d * d) as u64;
        for (dst, &v) in out_slice[base..base + d].iter_mut().zip(&y64) {
            *dst = cast::<T>(v);
        }
    }
    Ok((out, madds))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::angles::{angle_table_1d, frequencies};

    #[test]
    fn densify_half_d4() {
        let m = build_m(PairingMode::Half, &[4]).unwrap();
        let dense = densify::<f64>(&m);
        let expect = [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(dense.get(i, j), expect[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn densify_interleave_is_2x2_generator_blocks() {
        let m = build_m(PairingMode::Interleave, &[4]).unwrap();
        let dense = densify::<f64>(&m);
        let expect = [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(dense.get(i, j), expect[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn densified_maps_have_one_nonzero_per_row_and_column() {
        for (mode, dims) in [
            (PairingMode::Half, vec![8]),
            (PairingMode::Interleave, vec![4, 6]),
            (PairingMode::Quarter, vec![8, 4]),
        ] {
            let dense = densify::<f64>(&build_m(mode, &dims).unwrap());
            let d = dense.width();
            for i in 0..d {
                let row_nnz = (0..d).filter(|&j| dense.get(i, j) != 0.0).count();
                let col_nnz = (0..d).filter(|&j| dense.get(j, i) != 0.0).count();
                assert_eq!(row_nnz, 1);
                assert_eq!(col_nnz, 1);
            }
        }
    }

    #[test]
    fn build_r_zero_angles_is_identity() {
        for mode in [
            PairingMode::Half,
            PairingMode::Interleave,
            PairingMode::Quarter,
        ] {
            let r = build_r(&[0.0; 4], mode, &[8]).unwrap();
            assert_eq!(r.max_abs_diff(&DenseMatrix::identity(8)), 0.0, "{mode}");
        }
        // interleave-half rotates in the permuted basis: zero angles leave M1
        let r = build_r(&[0.0; 4], PairingMode::InterleaveHalf, &[8]).unwrap();
        let m1 = densify::<f64>(&build_extension_maps_nd(&[8]).unwrap().m1);
        assert_eq!(r.max_abs_diff(&m1), 0.0);
    }

    #[test]
    fn build_r_interleave_quarter_turn() {
        let r = build_r(
            &[std::f64::consts::FRAC_PI_2, 0.0],
            PairingMode::Interleave,
            &[4],
        )
        .unwrap();
        let expect = [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (r.get(i, j) - expect[i][j]).abs() < 1e-15,
                    "({i},{j}): {} vs {}",
                    r.get(i, j),
                    expect[i][j]
                );
            }
        }
    }

    #[test]
    fn build_r_orthogonal_unit_determinant() {
        let freqs = frequencies(8, 100.0).unwrap();
        let thetas = angle_table_1d(&[7, -3, 1000], &freqs);
        for mode in PairingMode::ALL {
            for s in 0..3 {
                let r = build_r(thetas.row(s), mode, &[8]).unwrap();
                let gram = r.transpose().matmul(&r);
                assert!(
                    gram.max_abs_diff(&DenseMatrix::identity(8)) < 1e-12,
                    "{mode} not orthogonal"
                );
                assert!((r.determinant() - 1.0).abs() < 1e-10, "{mode} det != 1");
            }
        }
    }

    #[test]
    fn oracle_zero_angles_is_identity() {
        let thetas = Tensor::new(vec![2, 2], vec![0.0; 4]).unwrap();
        let x = Tensor::new(vec![2, 4], vec![1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let out = oracle_forward(&x, &thetas, PairingMode::Half, &[4]).unwrap();
        assert_eq!(out.as_slice(), x.as_slice());
    }

    #[test]
    fn oracle_interleave_90_degrees() {
        let thetas = Tensor::new(vec![1, 2], vec![std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let x = Tensor::new(vec![1, 4], vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let out = oracle_forward(&x, &thetas, PairingMode::Interleave, &[4]).unwrap();
        let expect = [-2.0, 1.0, 3.0, 4.0];
        for (o, e) in out.as_slice().iter().zip(&expect) {
            assert!((o - e).abs() < 1e-15, "{o} vs {e}");
        }
    }

    #[test]
    fn oracle_counts_quadratic_madds() {
        let thetas = Tensor::new(vec![2, 4], vec![0.1; 8]).unwrap();
        let x = Tensor::<f32>::zeros(vec![3, 2, 8]);
        let (_, madds) = oracle_forward_counted(&x, &thetas, PairingMode::Half, &[8]).unwrap();
        assert_eq!(madds, 6 * 64);
    }

    #[test]
    fn oracle_norm_preserving_f64() {
        let freqs = frequencies(16, 10_000.0).unwrap();
        let thetas = angle_table_1d(&[0, 5, 123], &freqs);
        let data: Vec<f64> = (0..48).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = Tensor::new(vec![3, 16], data).unwrap();
        let out = oracle_forward(&x, &thetas, PairingMode::Quarter, &[16]).unwrap();
        assert!((out.norm_l2() - x.norm_l2()).abs() < 1e-10);
    }
}

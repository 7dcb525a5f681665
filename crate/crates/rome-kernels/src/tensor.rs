//! Dense row-major tensor.
//!
//! Every kernel in this crate acts on the last axis only, so a tensor of
//! shape `[B, N, S, D]` is treated as `B*N*S` independent rows of width `D`.
//! Angle tables cover `S` positions; data row `r` uses table row `r % S`,
//! which matches the `[B, N, S, D]` layout where the position index is the
//! second-to-last axis.

use crate::error::{KernelError, Result};
use num_traits::{Float, NumCast};

/// Element type for kernel payloads. `f32` is the default compute type;
/// `f64` is the tight-tolerance path.
pub trait Element:
    Float + NumCast + Send + Sync + std::fmt::Debug + std::fmt::Display + 'static
{
}

impl Element for f32 {}
impl Element for f64 {}

/// Cast an `f64` into the working element type.
#[inline]
pub(crate) fn cast<T: Element>(x: f64) -> T {
    T::from(x).expect("f64 -> element cast")
}

/// Widen an element to f64 (for accumulation and reporting).
#[inline]
pub fn to_f64<T: Element>(v: T) -> f64 {
    <f64 as NumCast>::from(v).expect("element -> f64")
}

/// Dense row-major numeric array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Element> Tensor<T> {
    /// Build a tensor, checking `product(shape) == data.len()`.
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if shape.is_empty() || numel != data.len() {
            return Err(KernelError::ShapeMismatch(format!(
                "shape {:?} holds {} elements, data has {}",
                shape,
                numel,
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// Zero-filled tensor of the given shape.
    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel: usize = shape.iter().product();
        Self {
            shape,
            data: vec![T::zero(); numel],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Width of the last axis (the feature dimension `D`).
    pub fn width(&self) -> usize {
        *self.shape.last().expect("tensor has at least one axis")
    }

    /// Number of rows when viewed as `[rows, width]`.
    pub fn num_rows(&self) -> usize {
        self.data.len() / self.width()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Row `r` of the `[rows, width]` view.
    pub fn row(&self, r: usize) -> &[T] {
        let w = self.width();
        &self.data[r * w..(r + 1) * w]
    }

    /// Iterator over the rows of the `[rows, width]` view.
    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.width())
    }

    /// Squared L2 norm accumulated in f64.
    pub fn norm_l2(&self) -> f64 {
        self.data
            .iter()
            .map(|&v| {
                let x: f64 = NumCast::from(v).expect("element -> f64");
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest absolute elementwise difference, accumulated in f64.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| {
                let a: f64 = NumCast::from(a).expect("element -> f64");
                let b: f64 = NumCast::from(b).expect("element -> f64");
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Index (row, col) of the first element differing by more than `tol`,
    /// if any. Used for actionable equivalence-failure reports.
    pub fn first_diff_index(&self, other: &Self, tol: f64) -> Option<(usize, usize)> {
        let w = self.width();
        self.data
            .iter()
            .zip(other.data.iter())
            .position(|(&a, &b)| {
                let a: f64 = NumCast::from(a).expect("element -> f64");
                let b: f64 = NumCast::from(b).expect("element -> f64");
                (a - b).abs() > tol
            })
            .map(|i| (i / w, i % w))
    }

    /// Validate this tensor for a rotary operation of width `d`: the last
    /// axis must equal `d` and the row count must be a multiple of the
    /// position count `s`.
    pub(crate) fn check_rotary_layout(&self, d: usize, s: usize) -> Result<()> {
        if self.width() != d {
            return Err(KernelError::ShapeMismatch(format!(
                "tensor last axis is {}, expected {}",
                self.width(),
                d
            )));
        }
        if s == 0 || !self.num_rows().is_multiple_of(s) {
            return Err(KernelError::ShapeMismatch(format!(
                "tensor has {} rows, not a multiple of {} positions",
                self.num_rows(),
                s
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_shape_data_mismatch() {
        let err = Tensor::<f32>::new(vec![2, 3], vec![0.0; 5]).unwrap_err();
        assert!(matches!(err, KernelError::ShapeMismatch(_)));
    }

    #[test]
    fn rows_view_of_4d_shape() {
        let t = Tensor::<f32>::zeros(vec![2, 3, 4, 8]);
        assert_eq!(t.width(), 8);
        assert_eq!(t.num_rows(), 24);
        assert_eq!(t.rows().count(), 24);
    }

    #[test]
    fn max_abs_diff_and_first_index() {
        let a = Tensor::new(vec![2, 2], vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        let mut b = a.clone();
        b.as_mut_slice()[3] = 4.5;
        assert_eq!(a.max_abs_diff(&b), 0.5);
        assert_eq!(a.first_diff_index(&b, 1e-6), Some((1, 1)));
        assert_eq!(a.first_diff_index(&a, 0.0), None);
    }
}

//! Row-major dense matrices and the scalar abstraction shared by the kernels.
//!
//! Kernels run in `f32` to mirror the target arithmetic; oracles and gradient
//! checks run the same code paths in `f64`.

use std::fmt;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::{Float, NumAssign};

/// Floating-point element type usable by every kernel in this crate.
///
/// The associated `Atomic` type backs the parallel execution mode: outputs
/// are accumulated with lock-free compare-and-swap adds on the bit pattern.
pub trait Scalar:
    Float + NumAssign + std::iter::Sum + Send + Sync + fmt::Debug + fmt::Display + 'static
{
    type Atomic: Send + Sync;

    fn atomic_zeroed(len: usize) -> Vec<Self::Atomic>;
    fn atomic_add(cell: &Self::Atomic, value: Self);
    fn atomic_into_vec(cells: Vec<Self::Atomic>) -> Vec<Self>;

    fn from_f32(v: f32) -> Self;
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    type Atomic = AtomicU32;

    fn atomic_zeroed(len: usize) -> Vec<AtomicU32> {
        (0..len).map(|_| AtomicU32::new(0f32.to_bits())).collect()
    }

    fn atomic_add(cell: &AtomicU32, value: f32) {
        cell.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |bits| {
            Some((f32::from_bits(bits) + value).to_bits())
        })
        .expect("fetch_update closure never fails");
    }

    fn atomic_into_vec(cells: Vec<AtomicU32>) -> Vec<f32> {
        cells
            .into_iter()
            .map(|c| f32::from_bits(c.into_inner()))
            .collect()
    }

    fn from_f32(v: f32) -> f32 {
        v
    }

    fn from_f64(v: f64) -> f32 {
        v as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    type Atomic = AtomicU64;

    fn atomic_zeroed(len: usize) -> Vec<AtomicU64> {
        (0..len).map(|_| AtomicU64::new(0f64.to_bits())).collect()
    }

    fn atomic_add(cell: &AtomicU64, value: f64) {
        cell.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |bits| {
            Some((f64::from_bits(bits) + value).to_bits())
        })
        .expect("fetch_update closure never fails");
    }

    fn atomic_into_vec(cells: Vec<AtomicU64>) -> Vec<f64> {
        cells
            .into_iter()
            .map(|c| f64::from_bits(c.into_inner()))
            .collect()
    }

    fn from_f32(v: f32) -> f64 {
        v as f64
    }

    fn from_f64(v: f64) -> f64 {
        v
    }

    fn as_f64(self) -> f64 {
        self
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Wraps an existing row-major buffer; panics if the length disagrees.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length != rows*cols");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Fills entry (r, c) with `f(r, c)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_f64(&self) -> DenseMatrix<f64> {
        self.map(|v| v.as_f64())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Naive `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for inner in 0..self.cols {
                let a = self.data[r * self.cols + inner];
                if a == T::zero() {
                    continue;
                }
                let rhs_row = rhs.row(inner);
                let out_row = out.row_mut(r);
                for c in 0..rhs.cols {
                    out_row[c] += a * rhs_row[c];
                }
            }
        }
        out
    }

    /// Naive `self^T * rhs` without materializing the transpose.
    pub fn transpose_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for inner in 0..self.rows {
            let lhs_row = self.row(inner);
            let rhs_row = rhs.row(inner);
            for r in 0..self.cols {
                let a = lhs_row[r];
                if a == T::zero() {
                    continue;
                }
                let out_row = out.row_mut(r);
                for c in 0..rhs.cols {
                    out_row[c] += a * rhs_row[c];
                }
            }
        }
        out
    }

    /// `self += alpha * other`, element-wise.
    pub fn scaled_add(&mut self, alpha: T, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * *b;
        }
    }

    pub fn scale(&mut self, alpha: T) {
        for a in self.data.iter_mut() {
            *a *= alpha;
        }
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a.as_f64() - b.as_f64()).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

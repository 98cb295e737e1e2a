use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point element type. Training runs in `f32`, gradient checks in `f64`.
pub trait Real: Float + FromPrimitive + Sum + Debug + Default + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("literal representable")
}

/// Dot product with eight independent accumulators. The reduction order is
/// fixed, so results are reproducible for a given length.
#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

/// `y += x`
#[inline]
pub fn add_assign<T: Real>(y: &mut [T], x: &[T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + *xi;
    }
}

pub fn norm<T: Real>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

pub fn argmax<T: Real>(x: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if *v > x[best] {
            best = i;
        }
    }
    best
}

/// Row-major dense matrix (the crate's 2-D tensor). Vectors are plain slices.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "payload of length {} does not fit shape ({rows}, {cols})", data.len());
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `out = self · x`
    pub fn matvec(&self, x: &[T], out: &mut [T]) {
        self.check_matvec(x.len(), out.len());
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `out += self · x`
    pub fn matvec_acc(&self, x: &[T], out: &mut [T]) {
        self.check_matvec(x.len(), out.len());
        for (i, o) in out.iter_mut().enumerate() {
            *o = *o + dot(self.row(i), x);
        }
    }

    /// `out += selfᵀ · g`
    pub fn matvec_t_acc(&self, g: &[T], out: &mut [T]) {
        assert!(
            g.len() == self.rows && out.len() == self.cols,
            "transposed product shape mismatch: matrix ({}, {}), upstream ({}), output ({})",
            self.rows,
            self.cols,
            g.len(),
            out.len()
        );
        for (i, gi) in g.iter().enumerate() {
            if *gi != T::zero() {
                axpy(*gi, self.row(i), out);
            }
        }
    }

    /// `self += g ⊗ x`
    pub fn outer_acc(&mut self, g: &[T], x: &[T]) {
        assert!(
            g.len() == self.rows && x.len() == self.cols,
            "outer product shape mismatch: matrix ({}, {}), left ({}), right ({})",
            self.rows,
            self.cols,
            g.len(),
            x.len()
        );
        for (i, gi) in g.iter().enumerate() {
            if *gi != T::zero() {
                axpy(*gi, x, self.row_mut(i));
            }
        }
    }

    fn check_matvec(&self, x: usize, out: usize) {
        assert!(
            x == self.cols && out == self.rows,
            "matrix-vector shape mismatch: matrix ({}, {}), input ({x}), output ({out})",
            self.rows,
            self.cols
        );
    }
}

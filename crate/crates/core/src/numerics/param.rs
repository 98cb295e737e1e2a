use std::collections::BTreeMap;

use super::rng::Rng;
use super::tensor::{lit, Matrix, Real};

/// A dense trainable matrix with its gradient.
#[derive(Debug, Clone)]
pub struct Param<T> {
    pub name: String,
    pub value: Matrix<T>,
    pub grad: Matrix<T>,
}

impl<T: Real> Param<T> {
    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Param { name: name.into(), value: Matrix::zeros(rows, cols), grad: Matrix::zeros(rows, cols) }
    }

    /// Uniform(−1/√fan_in, 1/√fan_in), where fan_in is the column count.
    pub fn fan_in_uniform(name: impl Into<String>, rows: usize, cols: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / (cols as f64).sqrt();
        let mut p = Self::zeros(name, rows, cols);
        fill_uniform(&mut p.value, bound, rng);
        p
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill_zero();
    }
}

/// An embedding table: dense values, gradients kept only for touched rows
/// (scatter-add). Row order in the gradient map is deterministic.
#[derive(Debug, Clone)]
pub struct RowParam<T> {
    pub name: String,
    pub value: Matrix<T>,
    pub grad: BTreeMap<usize, Vec<T>>,
}

impl<T: Real> RowParam<T> {
    pub fn zeros(name: impl Into<String>, rows: usize, dim: usize) -> Self {
        RowParam { name: name.into(), value: Matrix::zeros(rows, dim), grad: BTreeMap::new() }
    }

    pub fn uniform(name: impl Into<String>, rows: usize, dim: usize, bound: f64, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(name, rows, dim);
        fill_uniform(&mut p.value, bound, rng);
        p
    }

    pub fn dim(&self) -> usize {
        self.value.cols()
    }

    pub fn len(&self) -> usize {
        self.value.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.value.rows() == 0
    }

    pub fn row(&self, id: usize) -> &[T] {
        self.value.row(id)
    }

    /// `grad[id] += g`
    pub fn accumulate(&mut self, id: usize, g: &[T]) {
        assert!(id < self.value.rows(), "row {id} out of range for table {} of {} rows", self.name, self.value.rows());
        let dim = self.value.cols();
        let row = self.grad.entry(id).or_insert_with(|| vec![T::zero(); dim]);
        super::tensor::add_assign(row, g);
    }

    pub fn zero_grad(&mut self) {
        self.grad.clear();
    }
}

pub fn fill_uniform<T: Real>(m: &mut Matrix<T>, bound: f64, rng: &mut Rng) {
    for v in m.as_mut_slice() {
        *v = lit(rng.uniform(-bound, bound));
    }
}

/// Mutable handle on one trainable tensor.
pub enum ParamMut<'a, T> {
    Dense(&'a mut Param<T>),
    Rows(&'a mut RowParam<T>),
}

impl<T: Real> ParamMut<'_, T> {
    pub fn name(&self) -> &str {
        match self {
            ParamMut::Dense(p) => &p.name,
            ParamMut::Rows(p) => &p.name,
        }
    }

    pub fn value_mut(&mut self) -> &mut Matrix<T> {
        match self {
            ParamMut::Dense(p) => &mut p.value,
            ParamMut::Rows(p) => &mut p.value,
        }
    }

    pub fn zero_grad(&mut self) {
        match self {
            ParamMut::Dense(p) => p.zero_grad(),
            ParamMut::Rows(p) => p.zero_grad(),
        }
    }

    /// Gradient of element `k` of the flattened value.
    pub fn grad_at(&self, k: usize) -> T {
        match self {
            ParamMut::Dense(p) => p.grad.as_slice()[k],
            ParamMut::Rows(p) => {
                let dim = p.value.cols();
                p.grad.get(&(k / dim)).map_or(T::zero(), |r| r[k % dim])
            }
        }
    }
}

/// Anything that owns trainable tensors. Names must be unique within a model.
pub trait Parameters<T: Real> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>);

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>);

    fn params_mut(&mut self) -> Vec<ParamMut<'_, T>> {
        let mut v = Vec::new();
        self.collect_params(&mut v);
        v
    }

    fn values(&self) -> Vec<(&str, &Matrix<T>)> {
        let mut v = Vec::new();
        self.collect_values(&mut v);
        v
    }

    fn zero_grads(&mut self) {
        for mut p in self.params_mut() {
            p.zero_grad();
        }
    }
}

impl<T: Real> Parameters<T> for Param<T> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>) {
        out.push(ParamMut::Dense(self));
    }

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>) {
        out.push((&self.name, &self.value));
    }
}

impl<T: Real> Parameters<T> for RowParam<T> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>) {
        out.push(ParamMut::Rows(self));
    }

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>) {
        out.push((&self.name, &self.value));
    }
}

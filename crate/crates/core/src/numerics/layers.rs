//! Affine layers and elementwise activations with handwritten backward rules.

use super::param::{Param, ParamMut, Parameters};
use super::rng::Rng;
use super::tensor::{Matrix, Real};

/// `y = W·x + b` with `W: out × in`.
#[derive(Debug, Clone)]
pub struct Linear<T> {
    pub weight: Param<T>,
    pub bias: Param<T>,
}

impl<T: Real> Linear<T> {
    pub fn new(prefix: &str, input: usize, output: usize, rng: &mut Rng) -> Self {
        Linear {
            weight: Param::fan_in_uniform(format!("{prefix}.weight"), output, input, rng),
            bias: Param::zeros(format!("{prefix}.bias"), output, 1),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.value.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.value.rows()
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        let mut y = self.bias.value.as_slice().to_vec();
        self.weight.value.matvec_acc(x, &mut y);
        y
    }

    /// Accumulates `dW += g ⊗ x`, `db += g` and, when given, `dx += Wᵀ·g`.
    pub fn backward(&mut self, x: &[T], g: &[T], dx: Option<&mut [T]>) {
        self.weight.grad.outer_acc(g, x);
        super::tensor::add_assign(self.bias.grad.as_mut_slice(), g);
        if let Some(dx) = dx {
            self.weight.value.matvec_t_acc(g, dx);
        }
    }
}

impl<T: Real> Parameters<T> for Linear<T> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>) {
        self.weight.collect_params(out);
        self.bias.collect_params(out);
    }

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>) {
        self.weight.collect_values(out);
        self.bias.collect_values(out);
    }
}

#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[inline]
pub fn relu<T: Real>(x: T) -> T {
    x.max(T::zero())
}

/// Derivative of sigmoid expressed through its output `s`.
#[inline]
pub fn sigmoid_grad_from_output<T: Real>(s: T) -> T {
    s * (T::one() - s)
}

/// Derivative of tanh expressed through its output `t`.
#[inline]
pub fn tanh_grad_from_output<T: Real>(t: T) -> T {
    T::one() - t * t
}

/// Numerically stable softmax (max subtraction).
pub fn softmax<T: Real>(x: &[T]) -> Vec<T> {
    let m = x.iter().copied().fold(T::neg_infinity(), T::max);
    let mut out: Vec<T> = x.iter().map(|v| (*v - m).exp()).collect();
    let s: T = out.iter().copied().sum();
    out.iter_mut().for_each(|v| *v = *v / s);
    out
}

/// Backward through softmax: `dx = y ⊙ (dy − ⟨dy, y⟩)`.
pub fn softmax_backward<T: Real>(y: &[T], dy: &[T]) -> Vec<T> {
    let inner = super::tensor::dot(y, dy);
    y.iter().zip(dy).map(|(yi, gi)| *yi * (*gi - inner)).collect()
}

//! The probing classifier: two ReLU hidden layers and a softmax output.

use crate::numerics::layers::{relu, softmax, Linear};
use crate::numerics::loss::cross_entropy_from_probs;
use crate::numerics::tensor::{argmax, Matrix, Real};
use crate::numerics::{ParamMut, Parameters, Rng};

pub const HIDDEN: [usize; 2] = [128, 64];

#[derive(Debug, Clone)]
pub struct Mlp<T> {
    pub layer1: Linear<T>,
    pub layer2: Linear<T>,
    pub output: Linear<T>,
}

struct Activations<T> {
    h1: Vec<T>,
    h2: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> Mlp<T> {
    pub fn new(input: usize, classes: usize, rng: &mut Rng) -> Self {
        Self::with_hidden(input, HIDDEN, classes, rng)
    }

    pub fn with_hidden(input: usize, hidden: [usize; 2], classes: usize, rng: &mut Rng) -> Self {
        Mlp {
            layer1: Linear::new("probe.layer1", input, hidden[0], rng),
            layer2: Linear::new("probe.layer2", hidden[0], hidden[1], rng),
            output: Linear::new("probe.output", hidden[1], classes, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer1.input_dim()
    }

    pub fn classes(&self) -> usize {
        self.output.output_dim()
    }

    fn forward(&self, x: &[T]) -> Activations<T> {
        let h1: Vec<T> = self.layer1.forward(x).into_iter().map(relu).collect();
        let h2: Vec<T> = self.layer2.forward(&h1).into_iter().map(relu).collect();
        let probs = softmax(&self.output.forward(&h2));
        Activations { h1, h2, probs }
    }

    pub fn probabilities(&self, x: &[T]) -> Vec<T> {
        self.forward(x).probs
    }

    pub fn predict(&self, x: &[T]) -> usize {
        argmax(&self.forward(x).probs)
    }

    /// Cross-entropy of `label` given `x`; gradients are accumulated.
    pub fn loss_and_backward(&mut self, x: &[T], label: usize) -> T {
        let a = self.forward(x);
        let (loss, g3) = cross_entropy_from_probs(a.probs, label);
        let mut g2 = vec![T::zero(); a.h2.len()];
        self.output.backward(&a.h2, &g3, Some(&mut g2));
        for (g, h) in g2.iter_mut().zip(&a.h2) {
            if *h <= T::zero() {
                *g = T::zero();
            }
        }
        let mut g1 = vec![T::zero(); a.h1.len()];
        self.layer2.backward(&a.h1, &g2, Some(&mut g1));
        for (g, h) in g1.iter_mut().zip(&a.h1) {
            if *h <= T::zero() {
                *g = T::zero();
            }
        }
        self.layer1.backward(x, &g1, None);
        loss
    }
}

impl<T: Real> Parameters<T> for Mlp<T> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>) {
        self.layer1.collect_params(out);
        self.layer2.collect_params(out);
        self.output.collect_params(out);
    }

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>) {
        self.layer1.collect_values(out);
        self.layer2.collect_values(out);
        self.output.collect_values(out);
    }
}

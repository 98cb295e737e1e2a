use super::param::{ParamMut, Parameters};
use super::tensor::{axpy, Real};

/// A gradient that contains NaN or infinity; the step was not applied.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("non-finite gradient in parameter {param}")]
pub struct NonFiniteGradient {
    pub param: String,
}

/// Plain stochastic gradient descent with optional global-norm clipping.
#[derive(Debug, Clone, Copy)]
pub struct Sgd<T> {
    pub lr: T,
    pub clip_norm: Option<T>,
}

impl<T: Real> Sgd<T> {
    pub fn new(lr: T) -> Self {
        Sgd { lr, clip_norm: None }
    }

    pub fn with_clip_norm(mut self, clip: Option<T>) -> Self {
        self.clip_norm = clip;
        self
    }

    /// `value ← value − lr·scale·grad`, then zero every gradient. Returns the
    /// pre-clipping global gradient norm.
    pub fn step<M: Parameters<T> + ?Sized>(&self, model: &mut M) -> Result<T, NonFiniteGradient> {
        let mut params = model.params_mut();
        let mut sumsq = T::zero();
        for p in &params {
            let (s, finite) = match p {
                ParamMut::Dense(d) => sum_squares(d.grad.as_slice()),
                ParamMut::Rows(r) => r.grad.values().fold((T::zero(), true), |(acc, ok), row| {
                    let (s, f) = sum_squares(row);
                    (acc + s, ok && f)
                }),
            };
            if !finite || !s.is_finite() {
                let param = p.name().to_string();
                for q in params.iter_mut() {
                    q.zero_grad();
                }
                return Err(NonFiniteGradient { param });
            }
            sumsq = sumsq + s;
        }
        let norm = sumsq.sqrt();
        let scale = match self.clip_norm {
            Some(c) if norm > c => c / norm,
            _ => T::one(),
        };
        let step = -(self.lr * scale);
        for p in params.iter_mut() {
            match p {
                ParamMut::Dense(d) => {
                    if step != T::zero() {
                        axpy(step, d.grad.as_slice(), d.value.as_mut_slice());
                    }
                    d.grad.fill_zero();
                }
                ParamMut::Rows(r) => {
                    if step != T::zero() {
                        for (id, g) in &r.grad {
                            axpy(step, g, r.value.row_mut(*id));
                        }
                    }
                    r.grad.clear();
                }
            }
        }
        Ok(norm)
    }
}

fn sum_squares<T: Real>(v: &[T]) -> (T, bool) {
    let mut finite = true;
    let mut s = T::zero();
    for x in v {
        finite &= x.is_finite();
        s = s + *x * *x;
    }
    (s, finite)
}

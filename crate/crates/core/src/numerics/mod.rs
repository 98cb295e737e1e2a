//! Dense numeric kernel: matrices, affine layers, activations, softmax
//! cross-entropy, parameters with gradients, SGD, gradient checking and
//! checkpoint I/O. Every layer carries a handwritten backward rule.

pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod optim;
pub mod param;
pub mod rng;
pub mod tensor;

pub use layers::{relu, sigmoid, softmax, Linear};
pub use loss::cross_entropy_with_logits;
pub use optim::{NonFiniteGradient, Sgd};
pub use param::{Param, ParamMut, Parameters, RowParam};
pub use rng::Rng;
pub use tensor::{lit, Matrix, Real};

//! Sentence reconstruction: a GRU decoder that regenerates a sentence from
//! its bag-of-n-grams vector (or, for the baseline, from a GRU encoder's
//! final state), trained end to end with random teacher forcing.

pub mod gru;
pub mod model;
pub mod train;

pub use gru::{GruCell, GruStep};
pub use model::{encode_baseline, Decoder, Encoder, Forcing, ModelDims, ReconstructionModel, Variant};
pub use train::{draw_forcing, train, EpochLog, ForcingGranularity, TrainConfig};

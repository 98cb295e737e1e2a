pub mod corpus;
pub mod embedder;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod ngrams;
pub mod numerics;
pub mod probes;
pub mod reconstruction;
pub mod synthetic;

pub use error::{Error, Result};

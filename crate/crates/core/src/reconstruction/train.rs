use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::model::{Forcing, ReconstructionModel};
use crate::error::{Error, Result};
use crate::ngrams::SentenceNGramSet;
use crate::numerics::rng::tag;
use crate::numerics::{lit, Real, Rng, Sgd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingGranularity {
    /// One coin per sentence.
    Sentence,
    /// One coin per decoding step.
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub tf_prob: f64,
    pub tf_granularity: ForcingGranularity,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.01,
            epochs: 20,
            tf_prob: 0.5,
            tf_granularity: ForcingGranularity::Sentence,
            clip_norm: Some(5.0),
            seed: 0,
        }
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub wallclock_s: f64,
}

/// Draw the teacher-forcing decision for one sentence.
pub fn draw_forcing(cfg: &TrainConfig, rng: &mut Rng) -> Forcing {
    match cfg.tf_granularity {
        ForcingGranularity::Sentence => Forcing::Sentence(rng.bernoulli(cfg.tf_prob)),
        ForcingGranularity::Step => Forcing::PerStep(cfg.tf_prob),
    }
}

/// Per-sentence SGD over a freshly shuffled order each epoch.
/// `on_epoch` sees each log line as soon as the epoch ends.
pub fn train<T: Real>(
    model: &mut ReconstructionModel<T>,
    data: &[SentenceNGramSet],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<Vec<EpochLog>> {
    if data.is_empty() {
        return Err(Error::Config("training corpus is empty".into()));
    }
    let opt = Sgd::new(lit::<T>(cfg.lr)).with_clip_norm(cfg.clip_norm.map(lit::<T>));
    let mut order_rng = Rng::stream(cfg.seed, tag("train-order"));
    let mut forcing_rng = Rng::stream(cfg.seed, tag("teacher-forcing"));
    let mut logs = Vec::with_capacity(cfg.epochs);
    let start = Instant::now();
    for epoch in 1..=cfg.epochs {
        let order = order_rng.permutation(data.len());
        let mut total = 0.0f64;
        for (step, &i) in order.iter().enumerate() {
            let forcing = draw_forcing(cfg, &mut forcing_rng);
            let loss = model.decode_train_step(&data[i], forcing, &mut forcing_rng);
            let loss = loss.to_f64().unwrap_or(f64::NAN);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, step, reason: format!("loss is {loss}") });
            }
            opt.step(model).map_err(|e| Error::Divergence { epoch, step, reason: e.to_string() })?;
            total += loss;
        }
        let log = EpochLog { epoch, mean_loss: total / data.len() as f64, wallclock_s: start.elapsed().as_secs_f64() };
        on_epoch(&log);
        logs.push(log);
    }
    Ok(logs)
}

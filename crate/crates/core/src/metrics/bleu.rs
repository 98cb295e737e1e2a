//! Sentence-level BLEU with clipped n-gram precision.
//!
//! For each order `k` in `1..=min(max_order, |ref|)`:
//! `p_k = Σ_g min(count_cand(g), count_ref(g)) / (number of candidate k-grams)`,
//! with add-one smoothing of numerator and denominator for `k ≥ 2` when
//! enabled. The score is `BP · exp(mean_k ln p_k)` with
//! `BP = min(1, exp(1 − |ref| / |cand|))`. An empty candidate scores 0.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_order: usize,
    pub smoothing: bool,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_order: 4, smoothing: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("empty reference")]
pub struct EmptyReference;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    /// Clipped precision per order actually used.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub candidate_len: usize,
    pub reference_len: usize,
}

/// Clipped match count and candidate total for one order.
pub fn clipped_counts<T: Eq + Hash>(candidate: &[T], reference: &[T], order: usize) -> (usize, usize) {
    if candidate.len() < order {
        return (0, 0);
    }
    let mut ref_counts: HashMap<&[T], usize> = HashMap::new();
    for w in reference.windows(order) {
        *ref_counts.entry(w).or_insert(0) += 1;
    }
    let mut cand_counts: HashMap<&[T], usize> = HashMap::new();
    for w in candidate.windows(order) {
        *cand_counts.entry(w).or_insert(0) += 1;
    }
    let matched = cand_counts.iter().map(|(g, c)| (*c).min(ref_counts.get(g).copied().unwrap_or(0))).sum();
    (matched, candidate.len() - order + 1)
}

pub fn bleu_clip<T: Eq + Hash>(
    candidate: &[T],
    reference: &[T],
    cfg: &BleuConfig,
) -> Result<BleuScore, EmptyReference> {
    if reference.is_empty() {
        return Err(EmptyReference);
    }
    let orders = cfg.max_order.min(reference.len()).max(1);
    if candidate.is_empty() {
        return Ok(BleuScore {
            score: 0.0,
            precisions: vec![0.0; orders],
            brevity_penalty: 0.0,
            candidate_len: 0,
            reference_len: reference.len(),
        });
    }
    let precisions: Vec<f64> = (1..=orders)
        .map(|k| {
            let (m, total) = clipped_counts(candidate, reference, k);
            if k >= 2 && cfg.smoothing {
                (m as f64 + 1.0) / (total as f64 + 1.0)
            } else if total == 0 {
                0.0
            } else {
                m as f64 / total as f64
            }
        })
        .collect();
    let brevity_penalty = (1.0 - reference.len() as f64 / candidate.len() as f64).exp().min(1.0);
    let score = if precisions.contains(&0.0) {
        0.0
    } else {
        brevity_penalty * (precisions.iter().map(|p| p.ln()).sum::<f64>() / orders as f64).exp()
    };
    Ok(BleuScore { score, precisions, brevity_penalty, candidate_len: candidate.len(), reference_len: reference.len() })
}

//! Reconstruction scoring (BLEU-clip, grouped by sentence length) and the
//! representation-norm-by-length table.

pub mod bleu;

use serde::{Deserialize, Serialize};

pub use bleu::{bleu_clip, BleuConfig, BleuScore, EmptyReference};

use crate::corpus::Sentence;
use crate::ngrams::{encode_sentence, Vocabulary, NUM_SPECIALS};
use crate::numerics::tensor::norm;
use crate::reconstruction::ReconstructionModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub bleu_max_order: usize,
    pub smoothing: bool,
    /// Sentences with at most this many tokens are "short".
    pub short_threshold: usize,
    pub max_decode_len: usize,
    /// Longest sentence included in the norm table.
    pub norm_max_len: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { bleu_max_order: 4, smoothing: true, short_threshold: 6, max_decode_len: 30, norm_max_len: 14 }
    }
}

impl MetricsConfig {
    pub fn bleu(&self) -> BleuConfig {
        BleuConfig { max_order: self.bleu_max_order, smoothing: self.smoothing }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub index: usize,
    pub length: usize,
    pub score: f64,
    pub brevity_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    pub short_threshold: usize,
    pub overall: Option<f64>,
    pub short: Option<f64>,
    pub long: Option<f64>,
    pub count: usize,
    pub short_count: usize,
    pub long_count: usize,
    /// Mean clipped precision per order over sentences that use that order.
    pub mean_precisions: Vec<Option<f64>>,
    pub mean_brevity_penalty: Option<f64>,
    /// Fraction of candidates shorter than their reference.
    pub penalized_fraction: Option<f64>,
    /// Sentences whose reference was empty once specials were removed.
    pub skipped: usize,
    pub sentences: Vec<SentenceScore>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl BleuReport {
    /// Aggregate per-sentence scores; `scores[i]` is `(index, length, score)`.
    pub fn from_scores(
        scores: Vec<(usize, usize, BleuScore)>,
        short_threshold: usize,
        max_order: usize,
        skipped: usize,
    ) -> Self {
        let overall = mean(scores.iter().map(|s| s.2.score));
        let short = mean(scores.iter().filter(|s| s.1 <= short_threshold).map(|s| s.2.score));
        let long = mean(scores.iter().filter(|s| s.1 > short_threshold).map(|s| s.2.score));
        let short_count = scores.iter().filter(|s| s.1 <= short_threshold).count();
        let mean_precisions =
            (0..max_order).map(|k| mean(scores.iter().filter_map(|s| s.2.precisions.get(k).copied()))).collect();
        let mean_brevity_penalty = mean(scores.iter().map(|s| s.2.brevity_penalty));
        let penalized_fraction =
            mean(scores.iter().map(|s| if s.2.candidate_len < s.2.reference_len { 1.0 } else { 0.0 }));
        BleuReport {
            short_threshold,
            overall,
            short,
            long,
            count: scores.len(),
            short_count,
            long_count: scores.len() - short_count,
            mean_precisions,
            mean_brevity_penalty,
            penalized_fraction,
            skipped,
            sentences: scores
                .into_iter()
                .map(|(index, length, s)| SentenceScore {
                    index,
                    length,
                    score: s.score,
                    brevity_penalty: s.brevity_penalty,
                })
                .collect(),
        }
    }

    /// `group,count,mean_bleu` with rows overall, short, long.
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "group,count,mean_bleu\noverall,{},{}\nshort,{},{}\nlong,{},{}\n",
            self.count,
            fmt(self.overall),
            self.short_count,
            fmt(self.short),
            self.long_count,
            fmt(self.long)
        )
    }
}

fn content_words(ids: &[usize]) -> Vec<usize> {
    ids.iter().copied().filter(|id| *id >= NUM_SPECIALS).collect()
}

/// Greedy-decode every sentence from its representation and score it
/// against the original (in word-id space, specials removed from both).
pub fn corpus_bleu(
    model: &ReconstructionModel<f32>,
    vocab: &Vocabulary,
    sentences: &[Sentence],
    cfg: &MetricsConfig,
) -> BleuReport {
    let bleu = cfg.bleu();
    let mut scores = Vec::with_capacity(sentences.len());
    let mut skipped = 0;
    for (i, s) in sentences.iter().enumerate() {
        let enc = encode_sentence(s.tokens(), vocab);
        let reference = content_words(enc.words());
        let candidate = content_words(&model.reconstruct(&enc, cfg.max_decode_len));
        match bleu_clip(&candidate, &reference, &bleu) {
            Ok(score) => scores.push((i, s.len(), score)),
            Err(EmptyReference) => skipped += 1,
        }
    }
    BleuReport::from_scores(scores, cfg.short_threshold, cfg.bleu_max_order, skipped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBin {
    pub bin: String,
    pub min_len: usize,
    pub max_len: usize,
    pub count: usize,
    pub mean_norm: Option<f64>,
}

/// Mean Euclidean norm of sentence vectors in length bins 1-2, 3-4, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTable {
    pub bins: Vec<NormBin>,
}

impl NormTable {
    /// Bins of width 2 covering `1..=max_len`; longer sentences are ignored.
    pub fn from_norms(items: impl IntoIterator<Item = (usize, f64)>, max_len: usize) -> NormTable {
        let nbins = max_len.div_ceil(2);
        let mut sums = vec![(0.0f64, 0usize); nbins];
        for (len, n) in items {
            if (1..=max_len).contains(&len) {
                let b = (len - 1) / 2;
                sums[b].0 += n;
                sums[b].1 += 1;
            }
        }
        let bins = sums
            .into_iter()
            .enumerate()
            .map(|(b, (s, c))| {
                let (lo, hi) = (2 * b + 1, (2 * b + 2).min(max_len));
                NormBin {
                    bin: format!("{lo}-{hi}"),
                    min_len: lo,
                    max_len: hi,
                    count: c,
                    mean_norm: (c > 0).then(|| s / c as f64),
                }
            })
            .collect();
        NormTable { bins }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,count,mean_norm\n");
        for b in &self.bins {
            let m = b.mean_norm.map(|x| format!("{x:.6}")).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", b.bin, b.count, m));
        }
        out
    }

    /// Spearman correlation between bin index and bin mean over non-empty bins.
    pub fn monotonicity(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> =
            self.bins.iter().enumerate().filter_map(|(i, b)| b.mean_norm.map(|m| (i as f64, m))).collect();
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        spearman(&x, &y)
    }
}

/// Norm of each sentence's representation, binned by sentence length.
pub fn norm_by_length(
    model: &ReconstructionModel<f32>,
    vocab: &Vocabulary,
    sentences: &[Sentence],
    max_len: usize,
) -> NormTable {
    NormTable::from_norms(
        sentences.iter().filter(|s| s.len() <= max_len).map(|s| {
            let v = model.sentence_vector(&encode_sentence(s.tokens(), vocab));
            (s.len(), f64::from(norm(&v)))
        }),
        max_len,
    )
}

/// Average ranks (ties share the mean rank), 1-based.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; `None` with fewer than two points or zero variance.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedder::EmbeddingTable;
    use crate::numerics::{Parameters, Rng};
    use crate::reconstruction::{ModelDims, Variant};

    fn sent(s: &str) -> Sentence {
        Sentence::from_tokens(s.split(' ').map(String::from).collect()).unwrap()
    }

    #[test]
    fn overall_is_weighted_mean_of_groups() {
        let mk = |score: f64| BleuScore {
            score,
            precisions: vec![score],
            brevity_penalty: 1.0,
            candidate_len: 1,
            reference_len: 1,
        };
        let r =
            BleuReport::from_scores(vec![(0, 2, mk(1.0)), (1, 3, mk(0.5)), (2, 9, mk(0.2)), (3, 6, mk(0.9))], 6, 4, 0);
        let (s, l) = (r.short.unwrap(), r.long.unwrap());
        let weighted = (s * r.short_count as f64 + l * r.long_count as f64) / r.count as f64;
        assert!((r.overall.unwrap() - weighted).abs() < 1e-12);
        assert_eq!((r.short_count, r.long_count), (3, 1));
        assert!(r.to_csv().starts_with("group,count,mean_bleu\noverall,4,"));
    }

    #[test]
    fn empty_groups_are_absent() {
        let r = BleuReport::from_scores(vec![], 6, 4, 0);
        assert_eq!((r.overall, r.short, r.long), (None, None, None));
        assert!(r.to_csv().contains("short,0,\n"));
    }

    #[test]
    fn norm_bins_and_exclusion() {
        let t = NormTable::from_norms([(1, 2.0), (2, 4.0), (14, 7.0), (15, 100.0)], 14);
        assert_eq!(t.bins.len(), 7);
        assert_eq!(t.bins[0].bin, "1-2");
        assert_eq!(t.bins[0].mean_norm, Some(3.0));
        assert_eq!(t.bins[6].bin, "13-14");
        assert_eq!(t.bins[6].mean_norm, Some(7.0));
        assert_eq!(t.bins[3].mean_norm, None);
        assert_eq!(t.bins.iter().map(|b| b.count).sum::<usize>(), 3);
    }

    #[test]
    fn constant_embeddings_give_length_times_norm() {
        let sents: Vec<Sentence> =
            ["a", "a b", "a b c", "a b c d e", "b c d e a b c d e"].iter().map(|s| sent(s)).collect();
        let vocab = Vocabulary::build(&sents, 1, 100).unwrap();
        let dims = ModelDims { vocab_len: vocab.len(), words: vocab.word_count(), hidden: 4 };
        let mut model = ReconstructionModel::<f32>::new(Variant::BagOfNgrams(1), dims, false, &mut Rng::new(0));
        let mut table = EmbeddingTable::<f32>::zeros(vocab.len(), 4);
        let v = [0.5f32, -0.5, 0.5, 0.5];
        for id in 0..vocab.len() {
            table.table.value.row_mut(id).copy_from_slice(&v);
        }
        model.embedder = Some(table);
        let t = norm_by_length(&model, &vocab, &sents, 14);
        // ‖v‖ = 1, so each sentence's norm equals its length.
        assert_eq!(t.bins[0].mean_norm, Some(1.5));
        assert_eq!(t.bins[1].mean_norm, Some(3.0));
        assert_eq!(t.bins[2].mean_norm, Some(5.0));
        assert_eq!(t.bins[4].mean_norm, Some(9.0));
        assert_eq!(t.monotonicity(), Some(1.0));

        for mut p in model.params_mut() {
            p.value_mut().fill_zero();
        }
        let z = norm_by_length(&model, &vocab, &sents, 14);
        assert!(z.bins.iter().all(|b| b.mean_norm.is_none_or(|m| m == 0.0)));
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), None);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }
}

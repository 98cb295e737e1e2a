//! Labeled example generation for the four probing tasks.
//!
//! Examples hold references (sentence index, word ids, phrase tokens) rather
//! than vectors, so a generated set can be dumped, audited and re-materialized
//! against any frozen model.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::ngrams::{encode_with_order, Vocabulary, NUM_SPECIALS, UNK};
use crate::numerics::rng::{tag, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Length,
    WordContent,
    PhraseContent,
    WordOrder,
}

impl Task {
    pub fn all() -> [Task; 4] {
        [Task::Length, Task::WordContent, Task::PhraseContent, Task::WordOrder]
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Length => "length",
            Task::WordContent => "word_content",
            Task::PhraseContent => "phrase_content",
            Task::WordOrder => "word_order",
        }
    }

    /// Probe input size in units of the representation dimension.
    pub fn input_multiple(self) -> usize {
        match self {
            Task::Length => 1,
            Task::WordContent | Task::PhraseContent => 2,
            Task::WordOrder => 3,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::all().into_iter().find(|t| t.name() == s).ok_or_else(|| {
            format!("unknown probe task {s:?} (expected length, word_content, phrase_content or word_order)")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeSampling {
    /// Uniform over the candidate inventory.
    Uniform,
    /// Proportional to training-corpus frequency.
    FrequencyMatched,
}

/// Sentence-length classes: bins of `width` up to `max`, then one `max+1..` class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBins {
    pub width: usize,
    pub max: usize,
}

impl Default for LengthBins {
    fn default() -> Self {
        LengthBins { width: 2, max: 14 }
    }
}

impl LengthBins {
    pub fn classes(&self) -> usize {
        self.max.div_ceil(self.width) + 1
    }

    pub fn class_of(&self, len: usize) -> usize {
        if len > self.max {
            self.classes() - 1
        } else {
            len.saturating_sub(1) / self.width
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let last = self.classes() - 1;
        (0..self.classes())
            .map(|c| {
                if c == last {
                    format!("{}+", self.max + 1)
                } else {
                    format!("{}-{}", c * self.width + 1, ((c + 1) * self.width).min(self.max))
                }
            })
            .collect()
    }
}

/// Word-frequency buckets over the frequency rank (`id - 3`) of unigrams.
pub fn frequency_bucket(word: usize, bounds: &[usize]) -> String {
    if word == UNK {
        return "unknown".into();
    }
    let rank = word - NUM_SPECIALS;
    let k = bounds.iter().rposition(|b| *b <= rank).unwrap_or(0);
    match bounds.get(k + 1) {
        Some(hi) => format!("[{},{})", bounds[k], hi),
        None => format!("[{},...)", bounds[k]),
    }
}

pub fn frequency_bucket_labels(bounds: &[usize]) -> Vec<String> {
    let mut v: Vec<String> = bounds
        .iter()
        .enumerate()
        .map(|(k, lo)| match bounds.get(k + 1) {
            Some(hi) => format!("[{lo},{hi})"),
            None => format!("[{lo},...)"),
        })
        .collect();
    v.push("unknown".into());
    v
}

pub const DISTANCE_BUCKETS: [&str; 5] = ["0", "1", "2", "3", ">=4"];

pub fn distance_bucket(distance: usize) -> &'static str {
    DISTANCE_BUCKETS[distance.min(4)]
}

/// What the probe is asked about, besides the sentence itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Query {
    Sentence,
    Word {
        id: usize,
    },
    Phrase {
        tokens: Vec<String>,
    },
    /// Label 1 when `first` precedes `second` in the sentence.
    Pair {
        first: usize,
        second: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeExample {
    pub sentence: usize,
    pub query: Query,
    pub label: usize,
    pub bucket: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phrase_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationDiagnostics {
    /// Sentences without a usable word, or for which no negative could be found.
    pub skipped_word_content: usize,
    /// Sentence/phrase-length combinations with no in-inventory span.
    pub skipped_phrase: BTreeMap<usize, usize>,
    /// Sentences with fewer than two words that are in vocabulary and unique.
    pub skipped_word_order: usize,
}

/// Bigram/trigram candidates for phrase probes, shared by every model.
pub struct PhraseInventory<'a> {
    pub vocab: &'a Vocabulary,
    pub lengths: Vec<usize>,
}

const MAX_REJECTIONS: usize = 10_000;

/// Draws from a fixed id range, uniformly or by entry frequency.
struct Sampler {
    ids: Vec<usize>,
    cumulative: Option<Vec<u64>>,
}

impl Sampler {
    fn new(ids: Vec<usize>, vocab: &Vocabulary, mode: NegativeSampling) -> Sampler {
        let cumulative = (mode == NegativeSampling::FrequencyMatched).then(|| {
            let mut acc = 0u64;
            ids.iter()
                .map(|id| {
                    acc += vocab.entry(*id).map_or(0, |e| e.frequency);
                    acc
                })
                .collect()
        });
        Sampler { ids, cumulative }
    }

    fn draw(&self, rng: &mut Rng) -> Option<usize> {
        if self.ids.is_empty() {
            return None;
        }
        match &self.cumulative {
            None => Some(self.ids[rng.below(self.ids.len())]),
            Some(c) => {
                let total = *c.last()?;
                if total == 0 {
                    return None;
                }
                let x = rng.next_u64() % total;
                Some(self.ids[c.partition_point(|v| *v <= x)])
            }
        }
    }
}

pub struct Generator<'a> {
    pub vocab: &'a Vocabulary,
    pub phrases: &'a PhraseInventory<'a>,
    pub seed: u64,
    pub length_bins: LengthBins,
    pub frequency_bounds: &'a [usize],
    pub negatives: NegativeSampling,
}

impl Generator<'_> {
    fn rng(&self, task: Task, split: &str, i: usize) -> Rng {
        Rng::stream(self.seed, tag(&format!("{task}/{split}/{i}")))
    }

    pub fn generate(
        &self,
        task: Task,
        sentences: &[Sentence],
        split: &str,
        diag: &mut GenerationDiagnostics,
    ) -> Vec<ProbeExample> {
        match task {
            Task::Length => self.length(sentences),
            Task::WordContent => self.word_content(sentences, split, diag),
            Task::PhraseContent => self.phrase_content(sentences, split, diag),
            Task::WordOrder => self.word_order(sentences, split, diag),
        }
    }

    fn length(&self, sentences: &[Sentence]) -> Vec<ProbeExample> {
        let labels = self.length_bins.labels();
        sentences
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let label = self.length_bins.class_of(s.len());
                ProbeExample {
                    sentence: i,
                    query: Query::Sentence,
                    label,
                    bucket: labels[label].clone(),
                    word: None,
                    phrase_len: None,
                    distance: None,
                }
            })
            .collect()
    }

    fn word_example(&self, i: usize, id: usize, label: usize) -> ProbeExample {
        ProbeExample {
            sentence: i,
            query: Query::Word { id },
            label,
            bucket: frequency_bucket(id, self.frequency_bounds),
            word: Some(id),
            phrase_len: None,
            distance: None,
        }
    }

    /// One positive and one negative per sentence. `UNK` counts as a word:
    /// it is a positive for sentences with an out-of-vocabulary token.
    fn word_content(&self, sentences: &[Sentence], split: &str, diag: &mut GenerationDiagnostics) -> Vec<ProbeExample> {
        let words = self.vocab.ids_of_order(1);
        let mut candidates = vec![UNK];
        if self.negatives == NegativeSampling::FrequencyMatched {
            candidates.clear();
        }
        candidates.extend(words);
        let sampler = Sampler::new(candidates, self.vocab, self.negatives);
        let mut out = Vec::with_capacity(2 * sentences.len());
        for (i, s) in sentences.iter().enumerate() {
            let mut rng = self.rng(Task::WordContent, split, i);
            let mut present: Vec<usize> = encode_with_order(s.tokens(), self.vocab, 1).words().to_vec();
            present.sort_unstable();
            present.dedup();
            if present.is_empty() {
                diag.skipped_word_content += 1;
                continue;
            }
            let positive = present[rng.below(present.len())];
            let negative =
                (0..MAX_REJECTIONS).filter_map(|_| sampler.draw(&mut rng)).find(|w| present.binary_search(w).is_err());
            match negative {
                Some(negative) => {
                    out.push(self.word_example(i, positive, 1));
                    out.push(self.word_example(i, negative, 0));
                }
                None => diag.skipped_word_content += 1,
            }
        }
        out
    }

    /// Per sentence and phrase length, one contained span and one inventory
    /// phrase that is not a span. A length with no contained inventory phrase
    /// contributes nothing, keeping every length exactly balanced.
    fn phrase_content(
        &self,
        sentences: &[Sentence],
        split: &str,
        diag: &mut GenerationDiagnostics,
    ) -> Vec<ProbeExample> {
        let inv = self.phrases.vocab;
        let samplers: Vec<(usize, Sampler)> = self
            .phrases
            .lengths
            .iter()
            .map(|&len| (len, Sampler::new(inv.ids_of_order(len).collect(), inv, self.negatives)))
            .collect();
        let mut out = Vec::new();
        for (i, s) in sentences.iter().enumerate() {
            let mut rng = self.rng(Task::PhraseContent, split, i);
            for (len, sampler) in &samplers {
                let spans: Vec<&[String]> = s.tokens().windows(*len).collect();
                let span_set: HashSet<&[String]> = spans.iter().copied().collect();
                let mut positives: Vec<&[String]> = spans.iter().copied().filter(|w| inv.id(w).is_some()).collect();
                positives.sort();
                positives.dedup();
                if positives.is_empty() {
                    *diag.skipped_phrase.entry(*len).or_default() += 1;
                    continue;
                }
                let positive = positives[rng.below(positives.len())].to_vec();
                let negative = (0..MAX_REJECTIONS)
                    .filter_map(|_| sampler.draw(&mut rng))
                    .filter_map(|id| inv.entry(id))
                    .map(|e| &e.tokens)
                    .find(|toks| !span_set.contains(toks.as_slice()));
                let Some(negative) = negative else {
                    *diag.skipped_phrase.entry(*len).or_default() += 1;
                    continue;
                };
                for (tokens, label) in [(positive, 1), (negative.clone(), 0)] {
                    out.push(ProbeExample {
                        sentence: i,
                        query: Query::Phrase { tokens },
                        label,
                        bucket: len.to_string(),
                        word: None,
                        phrase_len: Some(*len),
                        distance: None,
                    });
                }
            }
        }
        out
    }

    /// One pair of distinct, once-occurring, in-vocabulary words per sentence.
    /// Presentation order comes from a balanced random label assignment.
    fn word_order(&self, sentences: &[Sentence], split: &str, diag: &mut GenerationDiagnostics) -> Vec<ProbeExample> {
        let mut pairs = Vec::new();
        for (i, s) in sentences.iter().enumerate() {
            let ids = encode_with_order(s.tokens(), self.vocab, 1).words().to_vec();
            let usable: Vec<usize> = (0..ids.len())
                .filter(|&p| ids[p] != UNK && ids.iter().filter(|w| **w == ids[p]).count() == 1)
                .collect();
            if usable.len() < 2 {
                diag.skipped_word_order += 1;
                continue;
            }
            let mut rng = self.rng(Task::WordOrder, split, i);
            let a = rng.below(usable.len());
            let mut b = rng.below(usable.len() - 1);
            if b >= a {
                b += 1;
            }
            let (p, q) = (usable[a.min(b)], usable[a.max(b)]);
            pairs.push((i, ids[p], ids[q], q - p - 1));
        }
        let perm = Rng::stream(self.seed, tag(&format!("{}/{split}/labels", Task::WordOrder))).permutation(pairs.len());
        let mut labels = vec![0; pairs.len()];
        for (rank, &k) in perm.iter().enumerate() {
            labels[k] = usize::from(rank < pairs.len() / 2);
        }
        pairs
            .into_iter()
            .zip(labels)
            .map(|((i, earlier, later, distance), label)| {
                let (first, second) = if label == 1 { (earlier, later) } else { (later, earlier) };
                ProbeExample {
                    sentence: i,
                    query: Query::Pair { first, second },
                    label,
                    bucket: distance_bucket(distance).into(),
                    word: None,
                    phrase_len: None,
                    distance: Some(distance),
                }
            })
            .collect()
    }
}

//! Contiguous n-gram extraction and the frequency-clipped n-gram vocabulary.
//!
//! Id layout: `0 = <sos>`, `1 = <eos>`, `2 = <unk>`, then retained entries
//! grouped by order (unigrams first), each group in descending frequency
//! with ties broken lexicographically by token sequence. Unigram ids are
//! therefore also the decoder's word ids, and `id - 3` is a unigram's
//! frequency rank.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Sentence;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 5;
pub const SOS: usize = 0;
pub const EOS: usize = 1;
pub const UNK: usize = 2;
pub const NUM_SPECIALS: usize = 3;
pub const SPECIAL_TOKENS: [&str; NUM_SPECIALS] = ["<sos>", "<eos>", "<unk>"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NGram {
    pub tokens: Vec<String>,
}

impl NGram {
    pub fn order(&self) -> usize {
        self.tokens.len()
    }
}

/// All contiguous windows of width `1..=max_order`, grouped by order, in
/// sentence order. Element `i - 1` holds the order-`i` windows.
pub fn extract_ngrams(tokens: &[String], max_order: usize) -> Vec<Vec<&[String]>> {
    assert!((1..=MAX_ORDER).contains(&max_order), "n-gram order {max_order} outside 1..={MAX_ORDER}");
    (1..=max_order).map(|i| tokens.windows(i).collect()).collect()
}

/// Raw n-gram frequencies, one map per order.
pub type NGramCounts = Vec<HashMap<Vec<String>, u64>>;

pub fn count_ngrams<'a>(sentences: impl IntoIterator<Item = &'a Sentence>, max_order: usize) -> NGramCounts {
    let mut counts: NGramCounts = vec![HashMap::new(); max_order];
    for s in sentences {
        for (i, windows) in extract_ngrams(s.tokens(), max_order).into_iter().enumerate() {
            for w in windows {
                match counts[i].get_mut(w) {
                    Some(c) => *c += 1,
                    None => {
                        counts[i].insert(w.to_vec(), 1);
                    }
                }
            }
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub tokens: Vec<String>,
    pub order: usize,
    pub frequency: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    max_order: usize,
    capacity: usize,
    specials: Vec<String>,
    entries: Vec<VocabEntry>,
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    max_order: usize,
    capacity: usize,
    /// Non-special entries; entry `k` has id `k + NUM_SPECIALS`.
    entries: Vec<VocabEntry>,
    index: HashMap<Vec<String>, usize>,
    per_order_counts: Vec<usize>,
}

fn by_frequency(a: &(&Vec<String>, u64), b: &(&Vec<String>, u64)) -> std::cmp::Ordering {
    b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

impl Vocabulary {
    pub fn build<'a>(
        sentences: impl IntoIterator<Item = &'a Sentence>,
        max_order: usize,
        capacity: usize,
    ) -> Result<Vocabulary> {
        if !(1..=MAX_ORDER).contains(&max_order) {
            return Err(Error::Config(format!("max_order {max_order} outside 1..={MAX_ORDER}")));
        }
        Vocabulary::from_counts(&count_ngrams(sentences, max_order), max_order, capacity)
    }

    /// Quota rule: ⌊capacity / n⌋ slots per order filled by frequency, then
    /// any unused slots go to the remaining candidates of all orders by
    /// global frequency.
    pub fn from_counts(counts: &NGramCounts, max_order: usize, capacity: usize) -> Result<Vocabulary> {
        if !(1..=MAX_ORDER).contains(&max_order) || counts.len() < max_order {
            return Err(Error::Config(format!("max_order {max_order} outside 1..={MAX_ORDER}")));
        }
        if capacity < max_order {
            return Err(Error::Config(format!("vocabulary capacity {capacity} smaller than max_order {max_order}")));
        }
        let quota = capacity / max_order;
        let mut chosen: Vec<Vec<(&Vec<String>, u64)>> = vec![Vec::new(); max_order];
        let mut leftovers: Vec<(&Vec<String>, u64)> = Vec::new();
        for (i, map) in counts.iter().take(max_order).enumerate() {
            let mut ranked: Vec<(&Vec<String>, u64)> = map.iter().map(|(k, v)| (k, *v)).collect();
            ranked.sort_by(by_frequency);
            let rest = ranked.split_off(quota.min(ranked.len()));
            chosen[i] = ranked;
            leftovers.extend(rest);
        }
        let taken: usize = chosen.iter().map(Vec::len).sum();
        leftovers.sort_by(by_frequency);
        for (tokens, freq) in leftovers.into_iter().take(capacity - taken) {
            chosen[tokens.len() - 1].push((tokens, freq));
        }
        let mut entries = Vec::new();
        for group in &mut chosen {
            group.sort_by(by_frequency);
            entries.extend(group.iter().map(|(t, f)| VocabEntry {
                tokens: (*t).clone(),
                order: t.len(),
                frequency: *f,
            }));
        }
        Ok(Vocabulary::from_entries(max_order, capacity, entries))
    }

    fn from_entries(max_order: usize, capacity: usize, entries: Vec<VocabEntry>) -> Vocabulary {
        let mut per_order_counts = vec![0; max_order];
        let mut index = HashMap::with_capacity(entries.len());
        for (k, e) in entries.iter().enumerate() {
            per_order_counts[e.order - 1] += 1;
            index.insert(e.tokens.clone(), k + NUM_SPECIALS);
        }
        Vocabulary { max_order, capacity, entries, index, per_order_counts }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total number of ids including specials.
    pub fn len(&self) -> usize {
        self.entries.len() + NUM_SPECIALS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn per_order_counts(&self) -> &[usize] {
        &self.per_order_counts
    }

    /// Specials plus unigram entries: the size of the decoder's word vocabulary.
    pub fn word_count(&self) -> usize {
        NUM_SPECIALS + self.per_order_counts[0]
    }

    pub fn id(&self, tokens: &[String]) -> Option<usize> {
        self.index.get(tokens).copied()
    }

    /// Word id of a single token, `UNK` when out of vocabulary.
    pub fn word_id(&self, token: &str) -> usize {
        // Lookup through a one-element slice keeps the map keyed by Vec<String>.
        self.index.get(std::slice::from_ref(&token.to_string())).copied().unwrap_or(UNK)
    }

    pub fn entry(&self, id: usize) -> Option<&VocabEntry> {
        id.checked_sub(NUM_SPECIALS).and_then(|k| self.entries.get(k))
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    /// Surface form of an id; specials render as `<sos>` etc.
    pub fn token_text(&self, id: usize) -> String {
        match id {
            SOS | EOS | UNK => SPECIAL_TOKENS[id].to_string(),
            _ => self.entry(id).map(|e| e.tokens.join(" ")).unwrap_or_else(|| format!("<id {id}>")),
        }
    }

    /// Ids of all retained entries of the given order.
    pub fn ids_of_order(&self, order: usize) -> std::ops::Range<usize> {
        let start = NUM_SPECIALS + self.per_order_counts[..order - 1].iter().sum::<usize>();
        start..start + self.per_order_counts[order - 1]
    }

    pub fn to_json(&self) -> String {
        let file = VocabularyFile {
            max_order: self.max_order,
            capacity: self.capacity,
            specials: SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect(),
            entries: self.entries.clone(),
        };
        serde_json::to_string(&file).expect("vocabulary serializes")
    }

    pub fn from_json(text: &str) -> Result<Vocabulary> {
        let file: VocabularyFile =
            serde_json::from_str(text).map_err(|e| Error::Data(format!("vocabulary JSON: {e}")))?;
        if file.specials != SPECIAL_TOKENS {
            return Err(Error::Data(format!("unexpected specials {:?}", file.specials)));
        }
        if !(1..=MAX_ORDER).contains(&file.max_order) {
            return Err(Error::Data(format!("max_order {} outside 1..={MAX_ORDER}", file.max_order)));
        }
        let mut last_order = 1;
        for e in &file.entries {
            if e.order != e.tokens.len() || e.order < last_order || e.order > file.max_order {
                return Err(Error::Data(format!("entry {:?} out of order or malformed", e.tokens)));
            }
            last_order = e.order;
        }
        Ok(Vocabulary::from_entries(file.max_order, file.capacity, file.entries))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Vocabulary> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Vocabulary::from_json(&text)
    }

    /// SHA-256 of the JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// In-vocabulary n-gram ids of one sentence, per order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceNGramSet {
    /// Element `i - 1` holds the order-`i` ids in sentence order.
    pub per_order: Vec<Vec<usize>>,
    /// Raw window counts `N_i = max(0, L − i + 1)` before vocabulary filtering.
    pub raw_counts: Vec<usize>,
}

impl SentenceNGramSet {
    /// Unigram ids (OOV words mapped to `UNK`); also the sentence's word ids.
    pub fn words(&self) -> &[usize] {
        &self.per_order[0]
    }

    pub fn all_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_order.iter().flatten().copied()
    }

    pub fn total(&self) -> usize {
        self.per_order.iter().map(Vec::len).sum()
    }
}

/// Encode with the vocabulary's own maximum order.
pub fn encode_sentence(tokens: &[String], vocab: &Vocabulary) -> SentenceNGramSet {
    encode_with_order(tokens, vocab, vocab.max_order())
}

/// OOV unigrams become `UNK`; OOV n-grams of order ≥ 2 are left out.
pub fn encode_with_order(tokens: &[String], vocab: &Vocabulary, max_order: usize) -> SentenceNGramSet {
    let max_order = max_order.min(vocab.max_order());
    let windows = extract_ngrams(tokens, max_order);
    let raw_counts = windows.iter().map(Vec::len).collect();
    let per_order = windows
        .into_iter()
        .enumerate()
        .map(|(i, ws)| {
            if i == 0 {
                ws.into_iter().map(|w| vocab.id(w).unwrap_or(UNK)).collect()
            } else {
                ws.into_iter().filter_map(|w| vocab.id(w)).collect()
            }
        })
        .collect();
    SentenceNGramSet { per_order, raw_counts }
}

/// Frequency of every token in a sequence (helper shared by samplers).
pub fn token_counts<K: Ord + Clone>(items: &[K]) -> BTreeMap<K, usize> {
    let mut m = BTreeMap::new();
    for it in items {
        *m.entry(it.clone()).or_insert(0) += 1;
    }
    m
}

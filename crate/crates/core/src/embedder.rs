//! Bag-of-n-grams sentence vectors: the sum of the embedding rows of every
//! in-vocabulary n-gram of orders `1..=n`, counted with multiplicity.

use crate::ngrams::{encode_with_order, SentenceNGramSet, Vocabulary};
use crate::numerics::param::{ParamMut, Parameters, RowParam};
use crate::numerics::{Matrix, Real, Rng};

pub const TABLE_NAME: &str = "embedder.table";

/// Embedding init bound: rows are drawn from uniform(−0.1, 0.1).
pub const EMBEDDING_INIT_BOUND: f64 = 0.1;

/// One K-dimensional row per vocabulary id, shared across all orders.
#[derive(Debug, Clone)]
pub struct EmbeddingTable<T> {
    pub table: RowParam<T>,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn new(vocab_len: usize, dim: usize, rng: &mut Rng) -> Self {
        EmbeddingTable { table: RowParam::uniform(TABLE_NAME, vocab_len, dim, EMBEDDING_INIT_BOUND, rng) }
    }

    pub fn zeros(vocab_len: usize, dim: usize) -> Self {
        EmbeddingTable { table: RowParam::zeros(TABLE_NAME, vocab_len, dim) }
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn row(&self, id: usize) -> &[T] {
        self.table.row(id)
    }
}

impl<T: Real> Parameters<T> for EmbeddingTable<T> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>) {
        self.table.collect_params(out);
    }

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>) {
        self.table.collect_values(out);
    }
}

/// `Ē_n` together with the ids that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector<T> {
    pub vector: Vec<T>,
    /// Contributing ids, with multiplicity, in accumulation order.
    pub ids: Vec<usize>,
}

impl<T: Real> SentenceVector<T> {
    /// No id contributed; `vector` is zero.
    pub fn is_empty_bag(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Sum of rows over every id in the set, orders ascending, sentence order within.
pub fn embed_sentence<T: Real>(encoded: &SentenceNGramSet, table: &EmbeddingTable<T>) -> SentenceVector<T> {
    let ids: Vec<usize> = encoded.all_ids().collect();
    embed_ids(ids, table)
}

pub fn embed_ids<T: Real>(ids: Vec<usize>, table: &EmbeddingTable<T>) -> SentenceVector<T> {
    let mut vector = vec![T::zero(); table.dim()];
    for &id in &ids {
        crate::numerics::tensor::add_assign(&mut vector, table.row(id));
    }
    SentenceVector { vector, ids }
}

/// Scatter-add: every contributing id's gradient row receives `upstream`
/// once per occurrence.
pub fn embed_backward<T: Real>(sv: &SentenceVector<T>, upstream: &[T], table: &mut EmbeddingTable<T>) {
    for &id in &sv.ids {
        table.table.accumulate(id, upstream);
    }
}

/// A phrase embedded as a miniature sentence, with n-gram orders up to
/// `min(n, phrase length)` and the same UNK/omission rules as sentences.
pub fn phrase_vector<T: Real>(
    phrase: &[String],
    vocab: &Vocabulary,
    table: &EmbeddingTable<T>,
    n: usize,
) -> SentenceVector<T> {
    let encoded = encode_with_order(phrase, vocab, n.min(phrase.len()).max(1));
    embed_sentence(&encoded, table)
}

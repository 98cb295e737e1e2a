//! Browser demo: n-gram bags, BLEU-clip, and sentence-vector norms by length.
//!
//! Every export takes plain values and returns a JSON string; errors come
//! back as `{"error": "..."}`.

use ngrambag::corpus::{normalize_and_tokenize, select_column, tokenize_all, Column, Diagnostics};
use ngrambag::metrics::bleu::{bleu_clip, BleuConfig};
use ngrambag::metrics::norm_by_length;
use ngrambag::ngrams::{extract_ngrams, token_counts, Vocabulary, MAX_ORDER};
use ngrambag::numerics::Rng;
use ngrambag::reconstruction::{ModelDims, ReconstructionModel, Variant};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn error(msg: impl ToString) -> Value {
    json!({ "error": msg.to_string() })
}

fn tokens(text: &str) -> Option<Vec<String>> {
    normalize_and_tokenize(text).ok().map(|s| s.tokens().to_vec())
}

/// Tokens of `text` and its n-grams of every order up to `n`, with counts.
pub fn ngram_bag_value(text: &str, n: usize) -> Value {
    if !(1..=MAX_ORDER).contains(&n) {
        return error(format!("n must be between 1 and {MAX_ORDER}"));
    }
    let Some(tokens) = tokens(text) else {
        return error("the sentence has no tokens");
    };
    let orders: Vec<Value> = extract_ngrams(&tokens, n)
        .into_iter()
        .enumerate()
        .map(|(i, windows)| {
            let grams: Vec<String> = windows.iter().map(|w| w.join(" ")).collect();
            let counts: Vec<Value> = token_counts(&grams).into_iter().map(|(g, c)| json!([g, c])).collect();
            json!({ "order": i + 1, "total": grams.len(), "distinct": counts.len(), "ngrams": counts })
        })
        .collect();
    json!({ "tokens": tokens, "orders": orders })
}

/// BLEU-clip of a candidate against a reference, both tokenized like the corpus.
pub fn bleu_value(candidate: &str, reference: &str, max_order: usize, smoothing: bool) -> Value {
    if max_order == 0 {
        return error("max_order must be at least 1");
    }
    let Some(reference) = tokens(reference) else {
        return error("the reference has no tokens");
    };
    let candidate = tokens(candidate).unwrap_or_default();
    match bleu_clip(&candidate, &reference, &BleuConfig { max_order, smoothing }) {
        Ok(score) => json!({ "candidate": candidate, "reference": reference, "score": score }),
        Err(e) => error(e),
    }
}

/// Mean norm of the untrained sentence vector per length bin, over the
/// sentences of `corpus` (one per line, or tab-separated pairs).
pub fn norm_curve_value(corpus: &str, n: usize, dim: usize, seed: u64) -> Value {
    if !(1..=MAX_ORDER).contains(&n) || dim == 0 {
        return error(format!("need 1 <= n <= {MAX_ORDER} and dim >= 1"));
    }
    let lines: Vec<String> = if corpus.contains('\t') {
        select_column(corpus, Column::Left).0
    } else {
        corpus.lines().map(String::from).collect()
    };
    let sentences = tokenize_all(&lines, 30, &mut Diagnostics::default());
    if sentences.is_empty() {
        return error("no sentences");
    }
    let vocab = match Vocabulary::build(&sentences, n, 50_000) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let dims = ModelDims { vocab_len: vocab.len(), words: vocab.word_count(), hidden: dim };
    let model = ReconstructionModel::<f32>::new(Variant::BagOfNgrams(n), dims, false, &mut Rng::new(seed));
    let table = norm_by_length(&model, &vocab, &sentences, 14);
    json!({ "sentences": sentences.len(), "vocab": vocab.len(), "bins": table.bins, "spearman": table.monotonicity() })
}

/// A synthetic corpus to feed the norm curve.
pub fn sample_corpus_text(seed: u64, count: usize) -> String {
    ngrambag::synthetic::generate_pairs(seed, count).join("\n")
}

#[wasm_bindgen]
pub fn ngram_bag(text: &str, n: usize) -> String {
    ngram_bag_value(text, n).to_string()
}

#[wasm_bindgen]
pub fn bleu(candidate: &str, reference: &str, max_order: usize, smoothing: bool) -> String {
    bleu_value(candidate, reference, max_order, smoothing).to_string()
}

#[wasm_bindgen]
pub fn norm_curve(corpus: &str, n: usize, dim: usize, seed: u32) -> String {
    norm_curve_value(corpus, n, dim, u64::from(seed)).to_string()
}

#[wasm_bindgen]
pub fn sample_corpus(seed: u32, count: usize) -> String {
    sample_corpus_text(u64::from(seed), count)
}

//! Sentence-pair ingestion: column selection, lowercasing, rule-based
//! tokenization, deduplication, seeded shuffling and the train/test split.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Sentences with more tokens than this are dropped at ingestion.
pub const DEFAULT_MAX_SENTENCE_LEN: usize = 30;

/// Characters that always form a token of their own: ASCII punctuation and
/// the Unicode General Punctuation block (U+2000..=U+206F, whitespace
/// excepted since whitespace separates tokens first).
pub const GENERAL_PUNCTUATION: std::ops::RangeInclusive<char> = '\u{2000}'..='\u{206F}';

pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || (GENERAL_PUNCTUATION.contains(&c) && !c.is_whitespace())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPair {
    pub left: String,
    pub right: String,
    pub source_line: usize,
}

impl RawPair {
    /// Split one line at its first two tabs. Returns `None` for lines
    /// without a tab or with an empty side.
    pub fn parse(line: &str, source_line: usize) -> Option<RawPair> {
        let mut cols = line.split('\t');
        let left = cols.next()?.trim();
        let right = cols.next()?.trim();
        if left.is_empty() || right.is_empty() {
            return None;
        }
        Some(RawPair { left: left.to_string(), right: right.to_string(), source_line })
    }

    pub fn column(&self, column: Column) -> &str {
        match column {
            Column::Left => &self.left,
            Column::Right => &self.right,
        }
    }
}

/// Ingestion tallies, written as `diagnostics.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub skipped_lines: usize,
    pub dropped_degenerate: usize,
    pub dropped_overlong: usize,
    pub duplicates_removed: usize,
}

/// Selected column of every well-formed line, in file order, plus the number
/// of non-blank lines that were skipped.
pub fn load_pairs(path: &Path, column: Column) -> Result<(Vec<String>, usize)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(select_column(&text, column))
}

pub fn select_column(text: &str, column: Column) -> (Vec<String>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match RawPair::parse(line, i + 1) {
            Some(pair) => out.push(pair.column(column).to_string()),
            None => skipped += 1,
        }
    }
    (out, skipped)
}

/// A tokenized, lowercased sentence. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sentence {
    tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("degenerate sentence: no tokens after normalization")]
pub struct DegenerateSentence;

impl Sentence {
    pub fn from_tokens(tokens: Vec<String>) -> std::result::Result<Sentence, DegenerateSentence> {
        if tokens.is_empty() {
            return Err(DegenerateSentence);
        }
        Ok(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Lowercase, split on whitespace, and break every punctuation character out
/// into its own token.
pub fn normalize_and_tokenize(text: &str) -> std::result::Result<Sentence, DegenerateSentence> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    for word in lower.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if is_punctuation(c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    Sentence::from_tokens(tokens)
}

/// Tokenize every line, dropping degenerate and overlong sentences.
pub fn tokenize_all(lines: &[String], max_len: usize, diag: &mut Diagnostics) -> Vec<Sentence> {
    let mut out = Vec::with_capacity(lines.len());
    for line in lines {
        match normalize_and_tokenize(line) {
            Ok(s) if s.len() > max_len => diag.dropped_overlong += 1,
            Ok(s) => out.push(s),
            Err(DegenerateSentence) => diag.dropped_degenerate += 1,
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub split: Split,
    pub language: String,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// One sentence per line, tokens joined by a single space.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for sent in &self.sentences {
            s.push_str(&sent.joined());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str, split: Split, language: &str) -> Result<Corpus> {
        let sentences = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                Sentence::from_tokens(l.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect())
                    .map_err(|_| Error::Data(format!("empty sentence on line {}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus { sentences, split, language: language.to_string() })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, split: Split, language: &str) -> Result<Corpus> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Corpus::from_text(&text, split, language)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub seed: u64,
    pub train_fraction: f64,
    pub train_cap: usize,
    pub test_cap: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { seed: 0, train_fraction: 0.8, train_cap: 20_000, test_cap: 5_000 }
    }
}

/// Remove exact duplicates (first occurrence kept), Fisher–Yates shuffle with
/// the seeded generator, take the first ⌊fraction·m⌋ as train and the rest as
/// test, then cap both. Returns the two corpora and the number of duplicates.
pub fn dedup_shuffle_split(
    sentences: Vec<Sentence>,
    cfg: &SplitConfig,
    language: &str,
) -> Result<(Corpus, Corpus, usize)> {
    let before = sentences.len();
    let mut seen = HashSet::with_capacity(before);
    let mut unique: Vec<Sentence> = sentences.into_iter().filter(|s| seen.insert(s.clone())).collect();
    let duplicates = before - unique.len();
    if unique.len() < 2 {
        return Err(Error::Config(format!("need at least 2 unique sentences to split, found {}", unique.len())));
    }
    if !(0.0..=1.0).contains(&cfg.train_fraction) {
        return Err(Error::Config(format!("train_fraction {} outside [0, 1]", cfg.train_fraction)));
    }
    Rng::new(cfg.seed).shuffle(&mut unique);
    let n_train = (cfg.train_fraction * unique.len() as f64).floor() as usize;
    let mut test = unique.split_off(n_train);
    let mut train = unique;
    train.truncate(cfg.train_cap);
    test.truncate(cfg.test_cap);
    Ok((
        Corpus { sentences: train, split: Split::Train, language: language.to_string() },
        Corpus { sentences: test, split: Split::Test, language: language.to_string() },
        duplicates,
    ))
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::gru::{GruCell, GruStep};
use crate::embedder::{embed_backward, embed_sentence, EmbeddingTable, SentenceVector, EMBEDDING_INIT_BOUND};
use crate::ngrams::{SentenceNGramSet, EOS, MAX_ORDER, SOS};
use crate::numerics::loss::cross_entropy_from_probs;
use crate::numerics::param::{ParamMut, Parameters, RowParam};
use crate::numerics::tensor::{argmax, lit};
use crate::numerics::{softmax, Linear, Matrix, Real, Rng};

/// Which sentence encoder feeds the decoder's initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Bag of n-grams of orders `1..=n`.
    BagOfNgrams(usize),
    /// Word-level GRU encoder (the autoencoder baseline).
    RnnEncoder,
}

impl Variant {
    /// n-gram order of the vocabulary this variant reads. The baseline uses
    /// the unigram vocabulary.
    pub fn vocab_order(self) -> usize {
        match self {
            Variant::BagOfNgrams(n) => n,
            Variant::RnnEncoder => 1,
        }
    }

    pub fn n(self) -> Option<usize> {
        match self {
            Variant::BagOfNgrams(n) => Some(n),
            Variant::RnnEncoder => None,
        }
    }

    /// All six models in reporting order.
    pub fn all() -> Vec<Variant> {
        std::iter::once(Variant::RnnEncoder).chain((1..=MAX_ORDER).map(Variant::BagOfNgrams)).collect()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::BagOfNgrams(n) => write!(f, "bag{n}"),
            Variant::RnnEncoder => f.write_str("rnn"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "rnn" {
            return Ok(Variant::RnnEncoder);
        }
        match s.strip_prefix("bag").and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if (1..=MAX_ORDER).contains(&n) => Ok(Variant::BagOfNgrams(n)),
            _ => Err(format!("unknown model variant {s:?} (expected rnn or bag1..bag{MAX_ORDER})")),
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Word-level GRU encoder for the baseline.
#[derive(Debug, Clone)]
pub struct Encoder<T> {
    pub embedding: RowParam<T>,
    pub gru: GruCell<T>,
}

impl<T: Real> Encoder<T> {
    /// Run the GRU left to right from `h = 0`; returns every step.
    pub fn forward(&self, words: &[usize]) -> Vec<GruStep<T>> {
        let mut h = vec![T::zero(); self.gru.hidden()];
        let mut steps = Vec::with_capacity(words.len());
        for &w in words {
            let step = self.gru.forward(&h, self.embedding.row(w));
            h.clone_from(&step.h);
            steps.push(step);
        }
        steps
    }

    pub fn backward(&mut self, words: &[usize], steps: &[GruStep<T>], dh_final: Vec<T>) {
        let mut dh = dh_final;
        for (step, &w) in steps.iter().zip(words).rev() {
            let (dh_prev, dx) = self.gru.backward(step, &dh);
            self.embedding.accumulate(w, &dx);
            dh = dh_prev;
        }
    }
}

/// Final hidden state of the baseline encoder.
pub fn encode_baseline<T: Real>(encoder: &Encoder<T>, words: &[usize]) -> Vec<T> {
    encoder.forward(words).pop().map(|s| s.h).unwrap_or_else(|| vec![T::zero(); encoder.gru.hidden()])
}

#[derive(Debug, Clone)]
pub struct Decoder<T> {
    /// Input embedding for `y_{t−1}`; absent when tied to the sentence-side table.
    pub embedding: Option<RowParam<T>>,
    pub gru: GruCell<T>,
    pub output: Linear<T>,
}

/// How the decoder chooses its next input during training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forcing {
    /// One decision for the whole sentence: gold inputs (`true`) or the
    /// model's own argmax (`false`).
    Sentence(bool),
    /// An independent coin with this probability at every step.
    PerStep(f64),
}

struct DecodeStep<T> {
    input: usize,
    loss: T,
    gru: GruStep<T>,
    dlogits: Vec<T>,
}

/// Hidden-state size and vocabulary sizes of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Rows of the n-gram embedding table (n-gram vocabulary incl. specials).
    pub vocab_len: usize,
    /// Decoder output classes (specials + unigrams).
    pub words: usize,
    /// GRU hidden units; also the embedding dimension K.
    pub hidden: usize,
}

#[derive(Debug, Clone)]
pub struct ReconstructionModel<T> {
    pub variant: Variant,
    pub dims: ModelDims,
    pub embedder: Option<EmbeddingTable<T>>,
    pub encoder: Option<Encoder<T>>,
    pub decoder: Decoder<T>,
    /// Decoder inputs read the embedder (or encoder) word rows instead of a
    /// separate table.
    pub tied: bool,
}

impl<T: Real> ReconstructionModel<T> {
    pub fn new(variant: Variant, dims: ModelDims, tied: bool, rng: &mut Rng) -> Self {
        let h = dims.hidden;
        let (embedder, encoder) = match variant {
            Variant::BagOfNgrams(_) => (Some(EmbeddingTable::new(dims.vocab_len, h, rng)), None),
            Variant::RnnEncoder => {
                let embedding = RowParam::uniform("encoder.embedding", dims.words, h, EMBEDDING_INIT_BOUND, rng);
                (None, Some(Encoder { embedding, gru: GruCell::new("encoder.gru", h, h, rng) }))
            }
        };
        let embedding =
            (!tied).then(|| RowParam::uniform("decoder.embedding", dims.words, h, EMBEDDING_INIT_BOUND, rng));
        let decoder = Decoder {
            embedding,
            gru: GruCell::new("decoder.gru", h, h, rng),
            output: Linear::new("decoder.output", h, dims.words, rng),
        };
        ReconstructionModel { variant, dims, embedder, encoder, decoder, tied }
    }

    fn input_table(&self) -> &RowParam<T> {
        if self.tied {
            match (&self.embedder, &self.encoder) {
                (Some(e), _) => &e.table,
                (None, Some(enc)) => &enc.embedding,
                _ => unreachable!("model has neither embedder nor encoder"),
            }
        } else {
            self.decoder.embedding.as_ref().expect("untied decoder owns an embedding")
        }
    }

    /// The sentence representation: `Ē_n` or the encoder's final state.
    pub fn sentence_vector(&self, sentence: &SentenceNGramSet) -> Vec<T> {
        match (&self.embedder, &self.encoder) {
            (Some(table), _) => embed_sentence(sentence, table).vector,
            (None, Some(enc)) => encode_baseline(enc, sentence.words()),
            _ => unreachable!("model has neither embedder nor encoder"),
        }
    }

    /// The representation of a single word: its embedder row, or the
    /// baseline encoder's input embedding.
    pub fn word_vector(&self, word: usize) -> &[T] {
        match (&self.embedder, &self.encoder) {
            (Some(table), _) => table.row(word),
            (None, Some(enc)) => enc.embedding.row(word),
            _ => unreachable!("model has neither embedder nor encoder"),
        }
    }

    /// Teacher-forced / free-running decode of `targets` from `h0`, then
    /// backpropagation through time. Decoder gradients are accumulated and
    /// the gradient with respect to `h0` is returned with the mean loss.
    fn decode_and_backprop(&mut self, h0: Vec<T>, targets: &[usize], forcing: Forcing, rng: &mut Rng) -> (T, Vec<T>) {
        let steps = {
            let table = self.input_table();
            let mut steps: Vec<DecodeStep<T>> = Vec::with_capacity(targets.len());
            let mut h = h0;
            let mut input = SOS;
            let forced_sentence = match forcing {
                Forcing::Sentence(f) => Some(f),
                Forcing::PerStep(_) => None,
            };
            for &target in targets {
                let gru = self.decoder.gru.forward(&h, table.row(input));
                let probs = softmax(&self.decoder.output.forward(&gru.h));
                let predicted = argmax(&probs);
                let (loss, dlogits) = cross_entropy_from_probs(probs, target);
                h.clone_from(&gru.h);
                steps.push(DecodeStep { input, loss, gru, dlogits });
                let teacher = match (forced_sentence, forcing) {
                    (Some(f), _) => f,
                    (None, Forcing::PerStep(p)) => rng.bernoulli(p),
                    (None, Forcing::Sentence(_)) => unreachable!(),
                };
                input = if teacher { target } else { predicted };
            }
            steps
        };

        let scale = T::one() / lit::<T>(targets.len() as f64);
        let loss = steps.iter().fold(T::zero(), |acc, s| acc + s.loss) * scale;

        let ReconstructionModel { embedder, encoder, decoder, tied, .. } = self;
        let Decoder { embedding, gru, output } = decoder;
        let table: &mut RowParam<T> = if *tied {
            match (embedder.as_mut(), encoder.as_mut()) {
                (Some(e), _) => &mut e.table,
                (None, Some(enc)) => &mut enc.embedding,
                _ => unreachable!(),
            }
        } else {
            embedding.as_mut().expect("untied decoder owns an embedding")
        };
        let mut dh_next = vec![T::zero(); gru.hidden()];
        for s in steps.iter().rev() {
            let dl: Vec<T> = s.dlogits.iter().map(|v| *v * scale).collect();
            let mut dh = dh_next;
            output.backward(&s.gru.h, &dl, Some(&mut dh));
            let (dh_prev, dx) = gru.backward(&s.gru, &dh);
            table.accumulate(s.input, &dx);
            dh_next = dh_prev;
        }
        (loss, dh_next)
    }

    /// One reconstruction step on a sentence: forward, loss (mean per-token
    /// cross-entropy over the words plus `EOS`) and full backpropagation into
    /// decoder and embedder/encoder. Gradients are accumulated, not applied.
    pub fn decode_train_step(&mut self, sentence: &SentenceNGramSet, forcing: Forcing, rng: &mut Rng) -> T {
        let mut targets = sentence.words().to_vec();
        targets.push(EOS);
        match self.variant {
            Variant::BagOfNgrams(_) => {
                let table = self.embedder.as_ref().expect("bag model owns an embedder");
                let sv: SentenceVector<T> = embed_sentence(sentence, table);
                let (loss, dh0) = self.decode_and_backprop(sv.vector.clone(), &targets, forcing, rng);
                embed_backward(&sv, &dh0, self.embedder.as_mut().unwrap());
                loss
            }
            Variant::RnnEncoder => {
                let enc = self.encoder.as_ref().expect("baseline owns an encoder");
                let steps = enc.forward(sentence.words());
                let h0 = steps.last().map(|s| s.h.clone()).unwrap_or_else(|| vec![T::zero(); self.dims.hidden]);
                let (loss, dh0) = self.decode_and_backprop(h0, &targets, forcing, rng);
                self.encoder.as_mut().unwrap().backward(sentence.words(), &steps, dh0);
                loss
            }
        }
    }

    /// Argmax decoding from `SOS` until `EOS` or `max_len` words. `EOS` is
    /// not included in the output.
    pub fn greedy_decode(&self, h0: &[T], max_len: usize) -> Vec<usize> {
        let table = self.input_table();
        let mut h = h0.to_vec();
        let mut input = SOS;
        let mut out = Vec::new();
        while out.len() < max_len {
            h = self.decoder.gru.forward(&h, table.row(input)).h;
            let next = argmax(&self.decoder.output.forward(&h));
            if next == EOS {
                break;
            }
            out.push(next);
            input = next;
        }
        out
    }

    /// Encode then decode.
    pub fn reconstruct(&self, sentence: &SentenceNGramSet, max_len: usize) -> Vec<usize> {
        self.greedy_decode(&self.sentence_vector(sentence), max_len)
    }
}

impl<T: Real> Parameters<T> for ReconstructionModel<T> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>) {
        if let Some(e) = &mut self.embedder {
            e.collect_params(out);
        }
        if let Some(enc) = &mut self.encoder {
            enc.embedding.collect_params(out);
            enc.gru.collect_params(out);
        }
        if let Some(e) = &mut self.decoder.embedding {
            e.collect_params(out);
        }
        self.decoder.gru.collect_params(out);
        self.decoder.output.collect_params(out);
    }

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>) {
        if let Some(e) = &self.embedder {
            e.collect_values(out);
        }
        if let Some(enc) = &self.encoder {
            enc.embedding.collect_values(out);
            enc.gru.collect_values(out);
        }
        if let Some(e) = &self.decoder.embedding {
            e.collect_values(out);
        }
        self.decoder.gru.collect_values(out);
        self.decoder.output.collect_values(out);
    }
}

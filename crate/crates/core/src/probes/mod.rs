//! Probing classifiers on frozen sentence representations: example
//! generation, MLP training and bucketed accuracy reports.

pub mod examples;
pub mod mlp;

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use examples::{
    distance_bucket, frequency_bucket, frequency_bucket_labels, GenerationDiagnostics, Generator, LengthBins,
    NegativeSampling, PhraseInventory, ProbeExample, Query, Task, DISTANCE_BUCKETS,
};
pub use mlp::Mlp;

use crate::corpus::Sentence;
use crate::embedder::phrase_vector;
use crate::error::{Error, Result};
use crate::ngrams::{encode_sentence, encode_with_order, Vocabulary};
use crate::numerics::rng::{tag, Rng};
use crate::numerics::Sgd;
use crate::reconstruction::{encode_baseline, ReconstructionModel, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Lower bounds of the word-frequency-rank buckets.
    pub frequency_buckets: Vec<usize>,
    pub length_bins: LengthBins,
    pub negatives: NegativeSampling,
    pub phrase_lengths: Vec<usize>,
    /// Capacity of the bigram/trigram vocabulary phrases are drawn from.
    pub phrase_capacity: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            lr: 0.001,
            epochs: 20,
            seed: 0,
            frequency_buckets: vec![0, 100, 500, 1000],
            length_bins: LengthBins::default(),
            negatives: NegativeSampling::Uniform,
            phrase_lengths: vec![2, 3],
            phrase_capacity: 20_000,
        }
    }
}

impl ProbeConfig {
    pub fn classes(&self, task: Task) -> usize {
        match task {
            Task::Length => self.length_bins.classes(),
            _ => 2,
        }
    }

    /// Buckets reported for a task, in table order.
    pub fn bucket_labels(&self, task: Task) -> Vec<String> {
        match task {
            Task::Length => self.length_bins.labels(),
            Task::WordContent => frequency_bucket_labels(&self.frequency_buckets),
            Task::PhraseContent => self.phrase_lengths.iter().map(ToString::to_string).collect(),
            Task::WordOrder => DISTANCE_BUCKETS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Read-only access to the vectors a probe consumes.
pub trait Representation {
    fn dim(&self) -> usize;
    fn sentence(&self, tokens: &[String]) -> Vec<f32>;
    fn word(&self, id: usize) -> Vec<f32>;
    fn phrase(&self, tokens: &[String]) -> Vec<f32>;
}

/// A trained reconstruction model viewed as a fixed representation.
pub struct Frozen<'a> {
    pub model: &'a ReconstructionModel<f32>,
    pub vocab: &'a Vocabulary,
}

impl Representation for Frozen<'_> {
    fn dim(&self) -> usize {
        self.model.dims.hidden
    }

    fn sentence(&self, tokens: &[String]) -> Vec<f32> {
        self.model.sentence_vector(&encode_sentence(tokens, self.vocab))
    }

    fn word(&self, id: usize) -> Vec<f32> {
        self.model.word_vector(id).to_vec()
    }

    fn phrase(&self, tokens: &[String]) -> Vec<f32> {
        match (self.model.variant, &self.model.embedder, &self.model.encoder) {
            (Variant::BagOfNgrams(n), Some(table), _) => phrase_vector(tokens, self.vocab, table, n).vector,
            (_, _, Some(enc)) => encode_baseline(enc, encode_with_order(tokens, self.vocab, 1).words()),
            _ => unreachable!("model has neither embedder nor encoder"),
        }
    }
}

/// Build the probe input of every example. Sentence vectors are computed once.
pub fn materialize<R: Representation + ?Sized>(
    examples: &[ProbeExample],
    sentences: &[Sentence],
    repr: &R,
) -> Vec<Vec<f32>> {
    let mut cache: Vec<Option<Vec<f32>>> = vec![None; sentences.len()];
    examples
        .iter()
        .map(|e| {
            let mut x = cache[e.sentence].get_or_insert_with(|| repr.sentence(sentences[e.sentence].tokens())).clone();
            match &e.query {
                Query::Sentence => {}
                Query::Word { id } => x.extend(repr.word(*id)),
                Query::Phrase { tokens } => x.extend(repr.phrase(tokens)),
                Query::Pair { first, second } => {
                    x.extend(repr.word(*first));
                    x.extend(repr.word(*second));
                }
            }
            x
        })
        .collect()
}

pub struct TrainedProbe {
    pub mlp: Mlp<f32>,
    pub epoch_losses: Vec<f64>,
}

/// Per-example SGD on softmax cross-entropy for a fixed number of epochs.
pub fn train_probe(
    inputs: &[Vec<f32>],
    labels: &[usize],
    classes: usize,
    cfg: &ProbeConfig,
    stream: &str,
) -> Result<TrainedProbe> {
    if inputs.is_empty() {
        return Err(Error::Data(format!("no training examples for probe {stream}")));
    }
    let dim = inputs[0].len();
    let mut mlp = Mlp::new(dim, classes, &mut Rng::stream(cfg.seed, tag(&format!("probe-init/{stream}"))));
    let mut order_rng = Rng::stream(cfg.seed, tag(&format!("probe-order/{stream}")));
    let opt = Sgd::new(cfg.lr as f32);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let mut total = 0.0f64;
        for (step, &i) in order_rng.permutation(inputs.len()).iter().enumerate() {
            let loss = f64::from(mlp.loss_and_backward(&inputs[i], labels[i]));
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, step, reason: format!("probe {stream} loss is {loss}") });
            }
            opt.step(&mut mlp).map_err(|e| Error::Divergence { epoch, step, reason: e.to_string() })?;
            total += loss;
        }
        epoch_losses.push(total / inputs.len() as f64);
    }
    Ok(TrainedProbe { mlp, epoch_losses })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketAccuracy {
    pub bucket: String,
    pub count: usize,
    /// Absent for empty buckets.
    pub accuracy: Option<f64>,
}

pub fn accuracy(mlp: &Mlp<f32>, inputs: &[Vec<f32>], labels: &[usize]) -> f64 {
    let hits = inputs.iter().zip(labels).filter(|(x, y)| mlp.predict(x) == **y).count();
    hits as f64 / inputs.len().max(1) as f64
}

/// Overall accuracy plus accuracy within each bucket of `bucket_order`;
/// buckets met in the data but not listed are appended.
pub fn bucketed_eval(
    predictions: &[usize],
    examples: &[ProbeExample],
    bucket_order: &[String],
) -> (f64, Vec<BucketAccuracy>) {
    let mut buckets: Vec<(String, usize, usize)> = bucket_order.iter().map(|b| (b.clone(), 0, 0)).collect();
    let mut hits = 0;
    for (p, e) in predictions.iter().zip(examples) {
        let k = match buckets.iter().position(|b| b.0 == e.bucket) {
            Some(k) => k,
            None => {
                buckets.push((e.bucket.clone(), 0, 0));
                buckets.len() - 1
            }
        };
        buckets[k].1 += 1;
        if *p == e.label {
            buckets[k].2 += 1;
            hits += 1;
        }
    }
    let overall = hits as f64 / examples.len().max(1) as f64;
    let buckets = buckets
        .into_iter()
        .map(|(bucket, count, h)| BucketAccuracy {
            bucket,
            count,
            accuracy: (count > 0).then(|| h as f64 / count as f64),
        })
        .collect();
    (overall, buckets)
}

/// Share of the most frequent label: what a constant classifier scores.
pub fn chance_level(labels: &[usize], classes: usize) -> f64 {
    let mut counts = vec![0usize; classes];
    for l in labels {
        counts[*l] += 1;
    }
    counts.iter().copied().max().unwrap_or(0) as f64 / labels.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub task: Task,
    pub model: String,
    pub n: Option<usize>,
    pub overall: f64,
    pub chance: f64,
    pub train_accuracy: f64,
    pub train_examples: usize,
    pub test_examples: usize,
    /// Probe-test label distribution.
    pub class_counts: Vec<usize>,
    pub buckets: Vec<BucketAccuracy>,
    pub epoch_losses: Vec<f64>,
    pub diagnostics: GenerationDiagnostics,
}

pub const CSV_HEADER: &str = "task,model,n,overall,bucket,bucket_count,accuracy";

impl ProbeReport {
    /// One row per bucket, without the header.
    pub fn csv_rows(&self) -> String {
        let n = self.n.map(|n| n.to_string()).unwrap_or_default();
        self.buckets
            .iter()
            .map(|b| {
                let acc = b.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
                format!("{},{},{},{:.6},{},{},{}\n", self.task, self.model, n, self.overall, b.bucket, b.count, acc)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}", self.csv_rows())
    }
}

pub struct ProbeRun {
    pub report: ProbeReport,
    pub train: Vec<ProbeExample>,
    pub test: Vec<ProbeExample>,
}

/// Generated examples of one task with their materialized inputs.
pub struct ProbeData {
    pub train: Vec<ProbeExample>,
    pub test: Vec<ProbeExample>,
    pub x_train: Vec<Vec<f32>>,
    pub x_test: Vec<Vec<f32>>,
    pub diagnostics: GenerationDiagnostics,
}

impl ProbeData {
    /// Train examples come only from `train_sentences` and test examples
    /// only from `test_sentences`.
    pub fn build<R: Representation + ?Sized>(
        task: Task,
        repr: &R,
        generator: &Generator,
        train_sentences: &[Sentence],
        test_sentences: &[Sentence],
    ) -> Result<ProbeData> {
        let mut diagnostics = GenerationDiagnostics::default();
        let train = generator.generate(task, train_sentences, "train", &mut diagnostics);
        let test = generator.generate(task, test_sentences, "test", &mut diagnostics);
        if test.is_empty() {
            return Err(Error::Data(format!("no probe-test examples for {task}")));
        }
        let x_train = materialize(&train, train_sentences, repr);
        let x_test = materialize(&test, test_sentences, repr);
        Ok(ProbeData { train, test, x_train, x_test, diagnostics })
    }

    pub fn train_labels(&self) -> Vec<usize> {
        self.train.iter().map(|e| e.label).collect()
    }

    pub fn test_labels(&self) -> Vec<usize> {
        self.test.iter().map(|e| e.label).collect()
    }
}

/// Generate, materialize, train and evaluate one probe.
pub fn run_probe<R: Representation + ?Sized>(
    task: Task,
    variant: Variant,
    repr: &R,
    generator: &Generator,
    train_sentences: &[Sentence],
    test_sentences: &[Sentence],
    cfg: &ProbeConfig,
) -> Result<ProbeRun> {
    let data = ProbeData::build(task, repr, generator, train_sentences, test_sentences)?;
    let classes = cfg.classes(task);
    let y_train = data.train_labels();
    let y_test = data.test_labels();
    let trained = train_probe(&data.x_train, &y_train, classes, cfg, &format!("{task}/{variant}"))?;
    let predictions: Vec<usize> = data.x_test.iter().map(|x| trained.mlp.predict(x)).collect();
    let (overall, buckets) = bucketed_eval(&predictions, &data.test, &cfg.bucket_labels(task));
    let mut class_counts = vec![0; classes];
    for y in &y_test {
        class_counts[*y] += 1;
    }
    let report = ProbeReport {
        task,
        model: variant.to_string(),
        n: variant.n(),
        overall,
        chance: chance_level(&y_test, classes),
        train_accuracy: accuracy(&trained.mlp, &data.x_train, &y_train),
        train_examples: data.train.len(),
        test_examples: data.test.len(),
        class_counts,
        buckets,
        epoch_losses: trained.epoch_losses,
        diagnostics: data.diagnostics,
    };
    Ok(ProbeRun { report, train: data.train, test: data.test })
}

/// Label-shuffle control: probe-test accuracy of classifiers trained on
/// permuted training labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub task: Task,
    pub model: String,
    pub n: Option<usize>,
    pub chance: f64,
    /// One accuracy per permutation, each with its own classifier init.
    pub accuracies: Vec<f64>,
    pub mean: f64,
}

/// A single classifier fitted to noise is a random function of the inputs,
/// and on informative representations its accuracy scatters widely around
/// chance; the mean over `permutations` estimates the null level.
#[allow(clippy::too_many_arguments)]
pub fn run_control<R: Representation + ?Sized>(
    task: Task,
    variant: Variant,
    repr: &R,
    generator: &Generator,
    train_sentences: &[Sentence],
    test_sentences: &[Sentence],
    cfg: &ProbeConfig,
    permutations: usize,
) -> Result<ControlReport> {
    let data = ProbeData::build(task, repr, generator, train_sentences, test_sentences)?;
    let classes = cfg.classes(task);
    let y_test = data.test_labels();
    let mut accuracies = Vec::with_capacity(permutations);
    for k in 0..permutations {
        let stream = format!("{task}/{variant}/control{k}");
        let mut y = data.train_labels();
        Rng::stream(cfg.seed, tag(&format!("label-shuffle/{stream}"))).shuffle(&mut y);
        let trained = train_probe(&data.x_train, &y, classes, cfg, &stream)?;
        accuracies.push(accuracy(&trained.mlp, &data.x_test, &y_test));
    }
    let mean = accuracies.iter().sum::<f64>() / permutations.max(1) as f64;
    Ok(ControlReport {
        task,
        model: variant.to_string(),
        n: variant.n(),
        chance: chance_level(&y_test, classes),
        accuracies,
        mean,
    })
}

/// The shared phrase inventory: bigrams and trigrams of the training split.
pub fn build_phrase_vocab(train: &[Sentence], cfg: &ProbeConfig) -> Result<Vocabulary> {
    let max = cfg.phrase_lengths.iter().copied().max().unwrap_or(1);
    Vocabulary::build(train, max, cfg.phrase_capacity)
}

/// One JSON object per line.
pub fn write_examples(path: &Path, examples: &[ProbeExample]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in examples {
        let line = serde_json::to_string(e).map_err(|e| Error::json(path, e))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_examples(path: &Path) -> Result<Vec<ProbeExample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    std::io::BufReader::new(file)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| {
            let l = l.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&l).map_err(|e| Error::json(path, e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Parameters;

    /// Sentence vectors that encode one bit in a known direction.
    struct Synthetic {
        dim: usize,
    }

    impl Representation for Synthetic {
        fn dim(&self) -> usize {
            self.dim
        }
        fn sentence(&self, tokens: &[String]) -> Vec<f32> {
            let mut v = vec![0.0; self.dim];
            v[0] = if tokens[0] == "pos" { 1.0 } else { -1.0 };
            v[1] = tokens.len() as f32 * 0.1;
            v
        }
        fn word(&self, id: usize) -> Vec<f32> {
            vec![id as f32 * 0.01; self.dim]
        }
        fn phrase(&self, tokens: &[String]) -> Vec<f32> {
            vec![tokens.len() as f32; self.dim]
        }
    }

    fn examples_from(labels: &[usize]) -> (Vec<ProbeExample>, Vec<Sentence>) {
        let sents = labels
            .iter()
            .map(|l| Sentence::from_tokens(vec![if *l == 1 { "pos" } else { "neg" }.to_string(), "x".into()]).unwrap())
            .collect();
        let ex = labels
            .iter()
            .enumerate()
            .map(|(i, l)| ProbeExample {
                sentence: i,
                query: Query::Sentence,
                label: *l,
                bucket: "all".into(),
                word: None,
                phrase_len: None,
                distance: None,
            })
            .collect();
        (ex, sents)
    }

    #[test]
    fn separable_two_class_set_is_learned_exactly() {
        let labels: Vec<usize> = (0..200).map(|i| i % 2).collect();
        let (ex, sents) = examples_from(&labels);
        let x = materialize(&ex, &sents, &Synthetic { dim: 4 });
        let cfg = ProbeConfig { lr: 0.01, ..ProbeConfig::default() };
        let t = train_probe(&x, &labels, 2, &cfg, "separable").unwrap();
        assert_eq!(accuracy(&t.mlp, &x, &labels), 1.0);
        assert!(t.epoch_losses.last().unwrap() < &t.epoch_losses[0]);
    }

    #[test]
    fn bucketed_eval_partitions_examples() {
        let mut ex: Vec<ProbeExample> = examples_from(&[1, 0, 1, 0, 1]).0;
        for (e, b) in ex.iter_mut().zip(["0", "1", "1", ">=4", "7"]) {
            e.bucket = b.into();
        }
        let order: Vec<String> = DISTANCE_BUCKETS.iter().map(|s| s.to_string()).collect();
        let labels: Vec<usize> = ex.iter().map(|e| e.label).collect();
        let (overall, buckets) = bucketed_eval(&labels, &ex, &order);
        assert_eq!(overall, 1.0);
        assert_eq!(buckets.iter().map(|b| b.count).sum::<usize>(), ex.len());
        assert!(buckets.iter().all(|b| b.accuracy == if b.count > 0 { Some(1.0) } else { None }));
        assert_eq!(buckets.last().unwrap().bucket, "7");
        let (wrong, _) = bucketed_eval(&[0, 0, 0, 0, 0], &ex, &order);
        assert!((wrong - 0.4).abs() < 1e-12);
    }

    #[test]
    fn chance_is_largest_class_share() {
        assert_eq!(chance_level(&[0, 1, 0, 1], 2), 0.5);
        assert_eq!(chance_level(&[2, 2, 2, 0], 3), 0.75);
    }

    #[test]
    fn csv_layout() {
        let r = ProbeReport {
            task: Task::WordOrder,
            model: "bag2".into(),
            n: Some(2),
            overall: 0.75,
            chance: 0.5,
            train_accuracy: 0.8,
            train_examples: 4,
            test_examples: 4,
            class_counts: vec![2, 2],
            buckets: vec![
                BucketAccuracy { bucket: "0".into(), count: 4, accuracy: Some(0.75) },
                BucketAccuracy { bucket: ">=4".into(), count: 0, accuracy: None },
            ],
            epoch_losses: vec![],
            diagnostics: Default::default(),
        };
        assert_eq!(
            r.to_csv(),
            "task,model,n,overall,bucket,bucket_count,accuracy\n\
             word_order,bag2,2,0.750000,0,4,0.750000\n\
             word_order,bag2,2,0.750000,>=4,0,\n"
        );
    }

    #[test]
    fn example_dump_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ex.jsonl");
        let (mut ex, _) = examples_from(&[1, 0]);
        ex[1].query = Query::Phrase { tokens: vec!["a".into(), "b".into()] };
        ex[1].phrase_len = Some(2);
        write_examples(&path, &ex).unwrap();
        assert_eq!(read_examples(&path).unwrap(), ex);
    }

    #[test]
    fn probing_leaves_the_model_untouched() {
        use crate::reconstruction::ModelDims;
        let sents: Vec<Sentence> = ["a b c d", "b c a", "d a b", "c d", "a b c d a"]
            .iter()
            .map(|s| Sentence::from_tokens(s.split(' ').map(String::from).collect()).unwrap())
            .collect();
        let vocab = Vocabulary::build(&sents, 2, 50).unwrap();
        let dims = ModelDims { vocab_len: vocab.len(), words: vocab.word_count(), hidden: 8 };
        let model = ReconstructionModel::<f32>::new(Variant::BagOfNgrams(2), dims, false, &mut Rng::new(2));
        let bytes = |m: &ReconstructionModel<f32>| {
            m.values().iter().flat_map(|(_, v)| v.as_slice().iter().flat_map(|x| x.to_le_bytes())).collect::<Vec<u8>>()
        };
        let before = bytes(&model);
        let cfg = ProbeConfig { epochs: 2, ..ProbeConfig::default() };
        let pv = build_phrase_vocab(&sents, &cfg).unwrap();
        let inv = PhraseInventory { vocab: &pv, lengths: cfg.phrase_lengths.clone() };
        let g = Generator {
            vocab: &vocab,
            phrases: &inv,
            seed: 1,
            length_bins: cfg.length_bins,
            frequency_bounds: &cfg.frequency_buckets,
            negatives: cfg.negatives,
        };
        let repr = Frozen { model: &model, vocab: &vocab };
        for task in Task::all() {
            let run = run_probe(task, model.variant, &repr, &g, &sents, &sents, &cfg).unwrap();
            let x = materialize(&run.test, &sents, &repr);
            assert!(x.iter().all(|v| v.len() == task.input_multiple() * 8));
            let total: usize = run.report.buckets.iter().map(|b| b.count).sum();
            assert_eq!(total, run.report.test_examples);
        }
        assert_eq!(before, bytes(&model));
    }
}

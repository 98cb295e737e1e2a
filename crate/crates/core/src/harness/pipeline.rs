//! The experiment steps. Each step reads the artifacts of the previous ones
//! from the run directory, so steps can be re-run individually.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{variant_seed, ExperimentConfig};
use crate::corpus::{dedup_shuffle_split, load_pairs, tokenize_all, Corpus, Diagnostics, Split};
use crate::error::{Error, Result};
use crate::metrics::{corpus_bleu, norm_by_length, BleuReport, NormTable};
use crate::ngrams::{encode_sentence, Vocabulary};
use crate::numerics::checkpoint;
use crate::numerics::Rng;
use crate::probes::{
    build_phrase_vocab, run_control, run_probe, write_examples, ControlReport, Frozen, Generator, PhraseInventory,
    ProbeConfig, ProbeReport, Task,
};
use crate::reconstruction::{train, ModelDims, ReconstructionModel, Variant};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Where every artifact of a run lives.
#[derive(Debug, Clone)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }
    pub fn data_dir(&self) -> PathBuf {
        self.root.join("data")
    }
    pub fn train_corpus(&self) -> PathBuf {
        self.data_dir().join("train.txt")
    }
    pub fn test_corpus(&self) -> PathBuf {
        self.data_dir().join("test.txt")
    }
    pub fn diagnostics(&self) -> PathBuf {
        self.data_dir().join("diagnostics.json")
    }
    pub fn vocab(&self, order: usize) -> PathBuf {
        self.root.join("vocab").join(format!("order{order}.json"))
    }
    pub fn phrase_vocab(&self) -> PathBuf {
        self.root.join("vocab").join("phrases.json")
    }
    pub fn model_dir(&self, variant: Variant) -> PathBuf {
        self.root.join("models").join(variant.to_string())
    }
    pub fn checkpoint(&self, variant: Variant) -> PathBuf {
        self.model_dir(variant).join("checkpoint.bin")
    }
    pub fn train_log(&self, variant: Variant) -> PathBuf {
        self.model_dir(variant).join("train_log.jsonl")
    }
    pub fn bleu(&self, variant: Variant, untrained: bool) -> PathBuf {
        let stem = if untrained { "bleu_untrained" } else { "bleu" };
        self.model_dir(variant).join(format!("{stem}.json"))
    }
    pub fn norms(&self, variant: Variant) -> PathBuf {
        self.model_dir(variant).join("norms.json")
    }
    pub fn probe(&self, variant: Variant, task: Task, control: bool) -> PathBuf {
        let suffix = if control { ".control" } else { "" };
        self.model_dir(variant).join("probes").join(format!("{task}{suffix}.json"))
    }
    pub fn manifest(&self, step: &str, variant: Option<Variant>) -> PathBuf {
        let name = match variant {
            Some(v) => format!("{step}-{v}.json"),
            None => format!("{step}.json"),
        };
        self.root.join("manifests").join(name)
    }
    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }
}

/// Everything needed to re-run a step bit-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub step: String,
    pub model: Option<String>,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub vocab_hash: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub wallclock_s: f64,
    pub artifacts: Vec<PathBuf>,
}

/// Receives one line per notable event.
pub type Progress<'a> = &'a (dyn Fn(&str) + Sync);

pub fn quiet(_: &str) {}

fn mkdirs(path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or(path);
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    mkdirs(path)?;
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    write_file(path, text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    layout: &RunLayout,
    cfg: &ExperimentConfig,
    step: &str,
    variant: Option<Variant>,
    vocab_hash: Option<String>,
    seeds: BTreeMap<String, u64>,
    start: Instant,
    artifacts: Vec<PathBuf>,
) -> Result<()> {
    let manifest = RunManifest {
        step: step.into(),
        model: variant.map(|v| v.to_string()),
        code_version: CODE_VERSION.into(),
        config: cfg.clone(),
        vocab_hash,
        seeds,
        wallclock_s: start.elapsed().as_secs_f64(),
        artifacts,
    };
    write_json(&layout.manifest(step, variant), &manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareDiagnostics {
    #[serde(flatten)]
    pub corpus: Diagnostics,
    pub train_sentences: usize,
    pub test_sentences: usize,
    /// Entries per n-gram order, keyed by vocabulary order.
    pub vocab_per_order: BTreeMap<usize, Vec<usize>>,
    pub phrase_inventory_per_order: Vec<usize>,
}

fn vocab_orders(cfg: &ExperimentConfig) -> BTreeSet<usize> {
    cfg.model.variants.iter().map(|v| v.vocab_order()).collect()
}

/// Read, clean, split, and build the vocabularies.
pub fn prepare(cfg: &ExperimentConfig, layout: &RunLayout, progress: Progress) -> Result<PrepareDiagnostics> {
    let start = Instant::now();
    let (lines, skipped) = load_pairs(&cfg.data.path, cfg.data.column)?;
    let mut diag = Diagnostics { skipped_lines: skipped, ..Diagnostics::default() };
    let sentences = tokenize_all(&lines, cfg.data.max_sentence_len, &mut diag);
    let (train, test, duplicates) = dedup_shuffle_split(sentences, &cfg.split(), &cfg.data.language)?;
    diag.duplicates_removed = duplicates;
    if train.is_empty() || test.is_empty() {
        return Err(Error::Data(format!(
            "split produced {} train and {} test sentences; both must be non-empty",
            train.len(),
            test.len()
        )));
    }
    write_json(&layout.config(), cfg)?;
    mkdirs(&layout.train_corpus())?;
    train.write(&layout.train_corpus())?;
    test.write(&layout.test_corpus())?;
    let mut artifacts = vec![layout.config(), layout.train_corpus(), layout.test_corpus()];
    let mut vocab_per_order = BTreeMap::new();
    for order in vocab_orders(cfg) {
        let vocab = Vocabulary::build(&train.sentences, order, cfg.vocab.capacity)?;
        mkdirs(&layout.vocab(order))?;
        vocab.save(&layout.vocab(order))?;
        vocab_per_order.insert(order, vocab.per_order_counts().to_vec());
        artifacts.push(layout.vocab(order));
    }
    let phrases = build_phrase_vocab(&train.sentences, &cfg.probe_config())?;
    phrases.save(&layout.phrase_vocab())?;
    artifacts.push(layout.phrase_vocab());
    let out = PrepareDiagnostics {
        corpus: diag,
        train_sentences: train.len(),
        test_sentences: test.len(),
        vocab_per_order,
        phrase_inventory_per_order: phrases.per_order_counts().to_vec(),
    };
    write_json(&layout.diagnostics(), &out)?;
    artifacts.push(layout.diagnostics());
    progress(&format!(
        "prepare: {} train / {} test sentences, {} duplicates removed",
        out.train_sentences, out.test_sentences, out.corpus.duplicates_removed
    ));
    let seeds = BTreeMap::from([("data".to_string(), cfg.data.seed)]);
    write_manifest(layout, cfg, "prepare", None, None, seeds, start, artifacts)?;
    Ok(out)
}

/// The prepared corpora and vocabularies, read back from disk.
pub struct Prepared {
    pub train: Corpus,
    pub test: Corpus,
    pub vocabs: BTreeMap<usize, Vocabulary>,
    pub phrases: Vocabulary,
}

impl Prepared {
    pub fn load(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Prepared> {
        let lang = &cfg.data.language;
        let missing = |p: PathBuf| -> Result<PathBuf> {
            if p.exists() {
                Ok(p)
            } else {
                Err(Error::Config(format!("{} not found; run `prepare` first", p.display())))
            }
        };
        let train = Corpus::read(&missing(layout.train_corpus())?, Split::Train, lang)?;
        let test = Corpus::read(&missing(layout.test_corpus())?, Split::Test, lang)?;
        let mut vocabs = BTreeMap::new();
        for order in vocab_orders(cfg) {
            vocabs.insert(order, Vocabulary::load(&missing(layout.vocab(order))?)?);
        }
        let phrases = Vocabulary::load(&missing(layout.phrase_vocab())?)?;
        Ok(Prepared { train, test, vocabs, phrases })
    }

    pub fn vocab(&self, variant: Variant) -> &Vocabulary {
        &self.vocabs[&variant.vocab_order()]
    }
}

fn dims(cfg: &ExperimentConfig, vocab: &Vocabulary) -> ModelDims {
    ModelDims { vocab_len: vocab.len(), words: vocab.word_count(), hidden: cfg.model.hidden }
}

/// The model exactly as training starts from it.
pub fn initial_model(cfg: &ExperimentConfig, variant: Variant, vocab: &Vocabulary) -> ReconstructionModel<f32> {
    let mut rng = Rng::new(variant_seed(cfg.model.seed, variant, "init"));
    ReconstructionModel::new(variant, dims(cfg, vocab), cfg.model.tied, &mut rng)
}

/// Train one variant; writes the checkpoint and one JSON line per epoch.
pub fn train_variant(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    prepared: &Prepared,
    variant: Variant,
    progress: Progress,
) -> Result<()> {
    let start = Instant::now();
    let vocab = prepared.vocab(variant);
    let mut model = initial_model(cfg, variant, vocab);
    let data: Vec<_> = prepared.train.sentences.iter().map(|s| encode_sentence(s.tokens(), vocab)).collect();
    let tc = cfg.train_config(variant);
    let log_path = layout.train_log(variant);
    mkdirs(&log_path)?;
    let mut log = std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut io_error = None;
    let result = train(&mut model, &data, &tc, |entry| {
        progress(&format!("train {variant}: epoch {} mean loss {:.4}", entry.epoch, entry.mean_loss));
        let line = serde_json::to_string(entry).expect("log entry serializes");
        if let Err(e) = writeln!(log, "{line}") {
            io_error.get_or_insert(e);
        }
    });
    if let Some(e) = io_error {
        return Err(Error::io(&log_path, e));
    }
    result?;
    let meta = json!({
        "variant": variant,
        "dims": model.dims,
        "tied": model.tied,
        "vocab_hash": vocab.hash(),
    });
    checkpoint::save(&layout.checkpoint(variant), &model, meta)?;
    let seeds = BTreeMap::from([
        ("init".to_string(), variant_seed(cfg.model.seed, variant, "init")),
        ("train".to_string(), tc.seed),
    ]);
    let artifacts = vec![layout.checkpoint(variant), log_path];
    write_manifest(layout, cfg, "train", Some(variant), Some(vocab.hash()), seeds, start, artifacts)
}

/// Rebuild a model from its checkpoint, checking it matches `vocab`.
pub fn load_model(path: &Path, vocab: &Vocabulary) -> Result<ReconstructionModel<f32>> {
    if !path.exists() {
        return Err(Error::Config(format!("{} not found; run `train` first", path.display())));
    }
    let ckpt = checkpoint::load(path)?;
    let meta = &ckpt.header.meta;
    let field = |k: &str| meta.get(k).cloned().ok_or_else(|| Error::Checkpoint(format!("meta lacks {k:?}")));
    let bad = |e: serde_json::Error| Error::Checkpoint(e.to_string());
    let variant: Variant = serde_json::from_value(field("variant")?).map_err(bad)?;
    let dims: ModelDims = serde_json::from_value(field("dims")?).map_err(bad)?;
    let tied: bool = serde_json::from_value(field("tied")?).map_err(bad)?;
    let hash: String = serde_json::from_value(field("vocab_hash")?).map_err(bad)?;
    if hash != vocab.hash() {
        return Err(Error::Checkpoint(format!("{} was trained with a different vocabulary", path.display())));
    }
    let mut model = ReconstructionModel::new(variant, dims, tied, &mut Rng::new(0));
    ckpt.restore_into(&mut model)?;
    Ok(model)
}

fn write_csv_pair<T: Serialize>(json_path: &Path, value: &T, csv: &str) -> Result<()> {
    write_json(json_path, value)?;
    write_file(&json_path.with_extension("csv"), csv)
}

/// BLEU of the trained and of the untrained model, and the norm table.
pub fn eval_variant(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    prepared: &Prepared,
    variant: Variant,
    checkpoint_path: Option<&Path>,
    progress: Progress,
) -> Result<(BleuReport, NormTable)> {
    let start = Instant::now();
    let vocab = prepared.vocab(variant);
    let ckpt = checkpoint_path.map(Path::to_path_buf).unwrap_or_else(|| layout.checkpoint(variant));
    let model = load_model(&ckpt, vocab)?;
    let mcfg = cfg.metrics_config();
    let test = &prepared.test.sentences;
    let bleu = corpus_bleu(&model, vocab, test, &mcfg);
    let untrained = corpus_bleu(&initial_model(cfg, variant, vocab), vocab, test, &mcfg);
    let norms = norm_by_length(&model, vocab, test, mcfg.norm_max_len);
    write_csv_pair(&layout.bleu(variant, false), &bleu, &bleu.to_csv())?;
    write_csv_pair(&layout.bleu(variant, true), &untrained, &untrained.to_csv())?;
    write_csv_pair(&layout.norms(variant), &norms, &norms.to_csv())?;
    progress(&format!(
        "eval {variant}: BLEU overall {:.4} (untrained {:.4})",
        bleu.overall.unwrap_or(f64::NAN),
        untrained.overall.unwrap_or(f64::NAN)
    ));
    let artifacts = vec![layout.bleu(variant, false), layout.bleu(variant, true), layout.norms(variant)];
    write_manifest(layout, cfg, "eval", Some(variant), Some(vocab.hash()), BTreeMap::new(), start, artifacts)?;
    Ok((bleu, norms))
}

struct ProbeContext<'a> {
    model: ReconstructionModel<f32>,
    vocab: &'a Vocabulary,
    inventory: PhraseInventory<'a>,
    pcfg: ProbeConfig,
}

impl<'a> ProbeContext<'a> {
    fn new(prepared: &'a Prepared, cfg: &ExperimentConfig, variant: Variant, ckpt: PathBuf) -> Result<Self> {
        let vocab = prepared.vocab(variant);
        let model = load_model(&ckpt, vocab)?;
        let pcfg = cfg.probe_config();
        let inventory = PhraseInventory { vocab: &prepared.phrases, lengths: pcfg.phrase_lengths.clone() };
        Ok(ProbeContext { model, vocab, inventory, pcfg })
    }

    fn generator(&self) -> Generator<'_> {
        Generator {
            vocab: self.vocab,
            phrases: &self.inventory,
            seed: self.pcfg.seed,
            length_bins: self.pcfg.length_bins,
            frequency_bounds: &self.pcfg.frequency_buckets,
            negatives: self.pcfg.negatives,
        }
    }

    fn repr(&self) -> Frozen<'_> {
        Frozen { model: &self.model, vocab: self.vocab }
    }
}

/// Train and evaluate the probes for `tasks` on one frozen model.
#[allow(clippy::too_many_arguments)]
pub fn probe_variant(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    prepared: &Prepared,
    variant: Variant,
    tasks: &[Task],
    checkpoint_path: Option<&Path>,
    progress: Progress,
) -> Result<Vec<ProbeReport>> {
    let start = Instant::now();
    let ckpt = checkpoint_path.map(Path::to_path_buf).unwrap_or_else(|| layout.checkpoint(variant));
    let ctx = ProbeContext::new(prepared, cfg, variant, ckpt)?;
    let generator = ctx.generator();
    let mut reports = Vec::new();
    let mut artifacts = Vec::new();
    for &task in tasks {
        let run = run_probe(
            task,
            variant,
            &ctx.repr(),
            &generator,
            &prepared.train.sentences,
            &prepared.test.sentences,
            &ctx.pcfg,
        )?;
        let path = layout.probe(variant, task, false);
        write_csv_pair(&path, &run.report, &run.report.to_csv())?;
        artifacts.push(path.clone());
        if cfg.probes.dump_examples {
            for (split, ex) in [("train", &run.train), ("test", &run.test)] {
                let p = path.with_file_name(format!("{task}.{split}.jsonl"));
                write_examples(&p, ex)?;
                artifacts.push(p);
            }
        }
        progress(&format!(
            "probe {variant} {task}: accuracy {:.4} (chance {:.4})",
            run.report.overall, run.report.chance
        ));
        reports.push(run.report);
    }
    let names: Vec<&str> = tasks.iter().map(|t| t.name()).collect();
    let step = format!("probe-{}", names.join("+"));
    let seeds = BTreeMap::from([("probes".to_string(), ctx.pcfg.seed)]);
    write_manifest(layout, cfg, &step, Some(variant), Some(ctx.vocab.hash()), seeds, start, artifacts)?;
    Ok(reports)
}

/// The label-shuffle control for `task` on one frozen model.
pub fn control_variant(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    prepared: &Prepared,
    variant: Variant,
    task: Task,
    progress: Progress,
) -> Result<ControlReport> {
    let start = Instant::now();
    let ctx = ProbeContext::new(prepared, cfg, variant, layout.checkpoint(variant))?;
    let report = run_control(
        task,
        variant,
        &ctx.repr(),
        &ctx.generator(),
        &prepared.train.sentences,
        &prepared.test.sentences,
        &ctx.pcfg,
        cfg.probes.control_permutations,
    )?;
    let path = layout.probe(variant, task, true);
    write_json(&path, &report)?;
    progress(&format!(
        "control {variant} {task}: shuffled-label accuracy {:.4} over {} permutations (chance {:.4})",
        report.mean,
        report.accuracies.len(),
        report.chance
    ));
    let seeds = BTreeMap::from([("probes".to_string(), ctx.pcfg.seed)]);
    let step = format!("control-{task}");
    write_manifest(layout, cfg, &step, Some(variant), Some(ctx.vocab.hash()), seeds, start, vec![path])?;
    Ok(report)
}

/// Run `f` over `items` on up to `jobs` threads; results keep input order.
pub fn run_jobs<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().expect("no job panicked")[i] = Some(r);
            });
        }
    });
    results.into_inner().expect("no job panicked").into_iter().map(|r| r.expect("every job ran")).collect()
}

/// First error of a batch, if any.
fn first_error(results: Vec<Result<()>>) -> Result<()> {
    results.into_iter().collect::<Result<Vec<()>>>().map(|_| ())
}

pub fn train_all(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    prepared: &Prepared,
    variants: &[Variant],
    jobs: usize,
    progress: Progress,
) -> Result<()> {
    first_error(run_jobs(jobs, variants, |v| train_variant(cfg, layout, prepared, *v, progress)))
}

pub fn eval_all(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    prepared: &Prepared,
    variants: &[Variant],
    jobs: usize,
    progress: Progress,
) -> Result<()> {
    first_error(run_jobs(jobs, variants, |v| eval_variant(cfg, layout, prepared, *v, None, progress).map(|_| ())))
}

/// All probes for `variants`, plus the label-shuffle control for the
/// configured control variants. Each (variant, task) pair is its own job.
pub fn probe_all(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    prepared: &Prepared,
    variants: &[Variant],
    tasks: &[Task],
    jobs: usize,
    progress: Progress,
) -> Result<()> {
    let mut items: Vec<(Variant, Task, bool)> = Vec::new();
    for &v in variants {
        for &t in tasks {
            items.push((v, t, false));
            if cfg.probes.control_variants.contains(&v) {
                items.push((v, t, true));
            }
        }
    }
    first_error(run_jobs(jobs, &items, |(v, t, control)| {
        if *control {
            control_variant(cfg, layout, prepared, *v, *t, progress).map(|_| ())
        } else {
            probe_variant(cfg, layout, prepared, *v, &[*t], None, progress).map(|_| ())
        }
    }))
}

/// prepare → train → eval → probe → report.
pub fn run_all(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    jobs: usize,
    progress: Progress,
) -> Result<super::report::Summary> {
    prepare(cfg, layout, progress)?;
    let prepared = Prepared::load(cfg, layout)?;
    let variants = &cfg.model.variants;
    train_all(cfg, layout, &prepared, variants, jobs, progress)?;
    eval_all(cfg, layout, &prepared, variants, jobs, progress)?;
    probe_all(cfg, layout, &prepared, variants, &Task::all(), jobs, progress)?;
    super::report::report(layout, progress)
}

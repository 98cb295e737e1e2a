use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ngrambag::harness::pipeline::{eval_all, train_all};
use ngrambag::harness::{self, ExperimentConfig, Prepared, RunLayout};
use ngrambag::probes::Task;
use ngrambag::reconstruction::Variant;
use ngrambag::Error;

/// Bag-of-n-grams sentence embeddings: train by reconstruction, score with
/// BLEU-clip, and probe what the frozen vectors encode.
#[derive(Parser, Debug)]
#[command(name = "ngrambag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean, deduplicate and split the corpus; build the vocabularies.
    Prepare(Common),
    /// Train reconstruction models; writes checkpoints and per-epoch logs.
    Train(Selected),
    /// BLEU-clip of trained and untrained models, and norm-by-length tables.
    Eval(WithCheckpoint),
    /// Train probing classifiers on frozen embeddings.
    Probe(ProbeArgs),
    /// Merge every per-model output into summary.json and CSV tables.
    Report(ReportArgs),
    /// prepare, train, eval, probe and report in one go.
    Run(Common),
    /// Write a synthetic tab-separated sentence-pair corpus.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the data, model and probe seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory; defaults to the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of concurrent jobs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct Selected {
    #[command(flatten)]
    common: Common,
    /// Model to run (rnn, bag1..bag5); repeatable. Defaults to every configured model.
    #[arg(long = "model")]
    models: Vec<Variant>,
}

#[derive(Args, Debug)]
struct WithCheckpoint {
    #[command(flatten)]
    selected: Selected,
    /// Checkpoint to load instead of the run directory's; needs exactly one --model.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[command(flatten)]
    inner: WithCheckpoint,
    /// Task (length, word_content, phrase_content, word_order); repeatable. Defaults to all four.
    #[arg(long = "task")]
    tasks: Vec<Task>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ReportArgs {
    /// Run directory to summarize.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summarize the config's output_dir.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Number of sentence pairs.
    #[arg(long, default_value_t = 4000)]
    count: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output file.
    #[arg(long)]
    output: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e)
        }
    }
}

fn progress(msg: &str) {
    eprintln!("{msg}");
}

fn load(common: &Common) -> Result<(ExperimentConfig, RunLayout), Failure> {
    let mut cfg = ExperimentConfig::load(&common.config).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(seed) = common.seed {
        cfg.override_seed(seed);
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if common.jobs == 0 {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let layout = RunLayout::new(&cfg.output_dir);
    Ok((cfg, layout))
}

fn variants(cfg: &ExperimentConfig, requested: &[Variant]) -> Result<Vec<Variant>, Failure> {
    if requested.is_empty() {
        return Ok(cfg.model.variants.clone());
    }
    for v in requested {
        if !cfg.model.variants.contains(v) {
            return Err(Failure::Usage(format!("model {v} is not listed in the config's model.variants")));
        }
    }
    Ok(requested.to_vec())
}

fn single_checkpoint(models: &[Variant], checkpoint: &Option<PathBuf>) -> Result<(), Failure> {
    if checkpoint.is_some() && models.len() != 1 {
        return Err(Failure::Usage("--checkpoint needs exactly one --model".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Prepare(common) => {
            let (cfg, layout) = load(&common)?;
            let diag = harness::prepare(&cfg, &layout, &progress)?;
            println!("{}", serde_json::to_string_pretty(&diag).expect("diagnostics serialize"));
        }
        Command::Train(sel) => {
            let (cfg, layout) = load(&sel.common)?;
            let models = variants(&cfg, &sel.models)?;
            let prepared = Prepared::load(&cfg, &layout)?;
            train_all(&cfg, &layout, &prepared, &models, sel.common.jobs, &progress)?;
            for v in models {
                println!("{}", layout.checkpoint(v).display());
            }
        }
        Command::Eval(args) => {
            let sel = &args.selected;
            let (cfg, layout) = load(&sel.common)?;
            let models = variants(&cfg, &sel.models)?;
            single_checkpoint(&sel.models, &args.checkpoint)?;
            let prepared = Prepared::load(&cfg, &layout)?;
            match &args.checkpoint {
                Some(ckpt) => {
                    harness::eval_variant(&cfg, &layout, &prepared, models[0], Some(ckpt), &progress)?;
                }
                None => eval_all(&cfg, &layout, &prepared, &models, sel.common.jobs, &progress)?,
            }
            for v in models {
                println!("{}", layout.bleu(v, false).display());
            }
        }
        Command::Probe(args) => {
            let sel = &args.inner.selected;
            let (cfg, layout) = load(&sel.common)?;
            let models = variants(&cfg, &sel.models)?;
            single_checkpoint(&sel.models, &args.inner.checkpoint)?;
            let tasks = if args.tasks.is_empty() { Task::all().to_vec() } else { args.tasks.clone() };
            let prepared = Prepared::load(&cfg, &layout)?;
            match &args.inner.checkpoint {
                Some(ckpt) => {
                    harness::probe_variant(&cfg, &layout, &prepared, models[0], &tasks, Some(ckpt), &progress)?;
                }
                None => harness::probe_all(&cfg, &layout, &prepared, &models, &tasks, sel.common.jobs, &progress)?,
            }
            for v in models {
                for &t in &tasks {
                    println!("{}", layout.probe(v, t, false).display());
                }
            }
        }
        Command::Report(args) => {
            let dir = match (args.out, args.config) {
                (Some(out), _) => out,
                (None, Some(config)) => {
                    ExperimentConfig::load(&config).map_err(|e| Failure::Usage(e.to_string()))?.output_dir
                }
                (None, None) => unreachable!("clap requires one of --out or --config"),
            };
            let layout = RunLayout::new(dir);
            if !layout.config().exists() {
                return Err(Failure::Usage(format!("{} is not a prepared run directory", layout.root.display())));
            }
            harness::report(&layout, &progress)?;
            println!("{}", layout.report_dir().join("summary.json").display());
        }
        Command::Run(common) => {
            let (cfg, layout) = load(&common)?;
            harness::run_all(&cfg, &layout, common.jobs, &progress)?;
            println!("{}", layout.report_dir().join("summary.json").display());
        }
        Command::Synth(args) => {
            let mut text = ngrambag::synthetic::generate_pairs(args.seed, args.count).join("\n");
            text.push('\n');
            ngrambag::harness::pipeline::write_file(&args.output, text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

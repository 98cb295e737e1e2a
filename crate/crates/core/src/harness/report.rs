//! Consolidated result tables built from a run directory.
//!
//! Every model and every bucket always gets a row; a run that is missing
//! shows up as nulls (JSON) or empty cells (CSV), never as zeros.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{read_json, write_file, write_json, Progress, RunLayout};
use crate::error::Result;
use crate::metrics::{BleuReport, NormTable};
use crate::probes::{ControlReport, ProbeReport, Task};
use crate::reconstruction::{EpochLog, Variant};

pub const SUMMARY_SCHEMA: &str = include_str!("../../schema/summary.schema.json");
pub const SUMMARY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRow {
    pub model: String,
    pub n: Option<usize>,
    pub overall: Option<f64>,
    pub short: Option<f64>,
    pub long: Option<f64>,
    pub untrained_overall: Option<f64>,
    pub short_count: Option<usize>,
    pub long_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub model: String,
    pub n: Option<usize>,
    pub epoch_losses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub task: Task,
    pub model: String,
    pub n: Option<usize>,
    pub overall: Option<f64>,
    pub chance: Option<f64>,
    pub shuffled_overall: Option<f64>,
}

/// One cell of a bucketed table (phrase length, frequency, distance or norm bin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub model: String,
    pub n: Option<usize>,
    pub bucket: String,
    pub count: Option<usize>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub summary_version: u32,
    pub name: String,
    pub language: String,
    pub models: Vec<String>,
    pub reconstruction: Vec<ReconstructionRow>,
    pub training: Vec<TrainingRow>,
    pub probes: Vec<ProbeRow>,
    pub phrase_content: Vec<BucketRow>,
    pub word_content_by_frequency: Vec<BucketRow>,
    pub word_order_by_distance: Vec<BucketRow>,
    pub norms: Vec<BucketRow>,
}

fn optional<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<T>> {
    if path.exists() {
        read_json(path).map(Some)
    } else {
        Ok(None)
    }
}

fn read_log(path: &Path) -> Result<Option<Vec<f64>>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str::<EpochLog>(l).map(|e| e.mean_loss).map_err(|e| crate::Error::json(path, e)))
        .collect::<Result<Vec<f64>>>()
        .map(Some)
}

fn bucket_rows(variant: Variant, labels: &[String], report: Option<&ProbeReport>) -> Vec<BucketRow> {
    labels
        .iter()
        .map(|label| {
            let b = report.and_then(|r| r.buckets.iter().find(|b| &b.bucket == label));
            BucketRow {
                model: variant.to_string(),
                n: variant.n(),
                bucket: label.clone(),
                count: b.map(|b| b.count),
                value: b.and_then(|b| b.accuracy),
            }
        })
        .collect()
}

fn norm_labels(max_len: usize) -> Vec<String> {
    NormTable::from_norms(std::iter::empty(), max_len).bins.into_iter().map(|b| b.bin).collect()
}

/// Gather every per-model artifact under `layout` into one summary. The
/// row set is fixed by the six models and the configured buckets.
pub fn collect(layout: &RunLayout) -> Result<Summary> {
    let cfg: ExperimentConfig = read_json(&layout.config())?;
    let pcfg = cfg.probe_config();
    let mut s = Summary {
        summary_version: SUMMARY_VERSION,
        name: cfg.name.clone(),
        language: cfg.data.language.clone(),
        models: Variant::all().iter().map(ToString::to_string).collect(),
        reconstruction: Vec::new(),
        training: Vec::new(),
        probes: Vec::new(),
        phrase_content: Vec::new(),
        word_content_by_frequency: Vec::new(),
        word_order_by_distance: Vec::new(),
        norms: Vec::new(),
    };
    for v in Variant::all() {
        let (model, n) = (v.to_string(), v.n());
        let bleu: Option<BleuReport> = optional(&layout.bleu(v, false))?;
        let untrained: Option<BleuReport> = optional(&layout.bleu(v, true))?;
        s.reconstruction.push(ReconstructionRow {
            model: model.clone(),
            n,
            overall: bleu.as_ref().and_then(|b| b.overall),
            short: bleu.as_ref().and_then(|b| b.short),
            long: bleu.as_ref().and_then(|b| b.long),
            untrained_overall: untrained.as_ref().and_then(|b| b.overall),
            short_count: bleu.as_ref().map(|b| b.short_count),
            long_count: bleu.as_ref().map(|b| b.long_count),
        });
        s.training.push(TrainingRow { model: model.clone(), n, epoch_losses: read_log(&layout.train_log(v))? });

        let mut probe_reports = Vec::new();
        for task in Task::all() {
            let r: Option<ProbeReport> = optional(&layout.probe(v, task, false))?;
            let control: Option<ControlReport> = optional(&layout.probe(v, task, true))?;
            s.probes.push(ProbeRow {
                task,
                model: model.clone(),
                n,
                overall: r.as_ref().map(|r| r.overall),
                chance: r.as_ref().map(|r| r.chance),
                shuffled_overall: control.map(|r| r.mean),
            });
            probe_reports.push(r);
        }
        s.word_content_by_frequency.extend(bucket_rows(
            v,
            &pcfg.bucket_labels(Task::WordContent),
            probe_reports[1].as_ref(),
        ));
        s.phrase_content.extend(bucket_rows(v, &pcfg.bucket_labels(Task::PhraseContent), probe_reports[2].as_ref()));
        s.word_order_by_distance.extend(bucket_rows(
            v,
            &pcfg.bucket_labels(Task::WordOrder),
            probe_reports[3].as_ref(),
        ));

        let norms: Option<NormTable> = optional(&layout.norms(v))?;
        for label in norm_labels(cfg.metrics.norm_max_len) {
            let b = norms.as_ref().and_then(|t| t.bins.iter().find(|b| b.bin == label));
            s.norms.push(BucketRow {
                model: model.clone(),
                n,
                bucket: label,
                count: b.map(|b| b.count),
                value: b.and_then(|b| b.mean_norm),
            });
        }
    }
    Ok(s)
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub const RECONSTRUCTION_COLUMNS: &str = "language,model,n,overall,short,long,untrained_overall,short_count,long_count";
pub const PROBE_COLUMNS: &str = "task,model,n,overall,chance,shuffled_overall";
pub const TRAINING_COLUMNS: &str = "model,n,epoch,mean_loss";

fn bucket_csv(header: &str, rows: &[BucketRow]) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.model, cell(&r.n), r.bucket, cell(&r.count), num(r.value)));
    }
    out
}

/// `(file name, contents)` of every CSV table.
pub fn tables(s: &Summary) -> Vec<(&'static str, String)> {
    let mut recon = format!("{RECONSTRUCTION_COLUMNS}\n");
    for r in &s.reconstruction {
        recon.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.language,
            r.model,
            cell(&r.n),
            num(r.overall),
            num(r.short),
            num(r.long),
            num(r.untrained_overall),
            cell(&r.short_count),
            cell(&r.long_count)
        ));
    }
    let mut probes = format!("{PROBE_COLUMNS}\n");
    for r in &s.probes {
        probes.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.task,
            r.model,
            cell(&r.n),
            num(r.overall),
            num(r.chance),
            num(r.shuffled_overall)
        ));
    }
    let mut training = format!("{TRAINING_COLUMNS}\n");
    for r in &s.training {
        for (e, loss) in r.epoch_losses.iter().flatten().enumerate() {
            training.push_str(&format!("{},{},{},{:.6}\n", r.model, cell(&r.n), e + 1, loss));
        }
    }
    vec![
        ("reconstruction.csv", recon),
        ("probes.csv", probes),
        ("phrase_content.csv", bucket_csv("model,n,phrase_len,count,accuracy", &s.phrase_content)),
        ("word_content_frequency.csv", bucket_csv("model,n,bucket,count,accuracy", &s.word_content_by_frequency)),
        ("word_order_distance.csv", bucket_csv("model,n,bucket,count,accuracy", &s.word_order_by_distance)),
        ("norms.csv", bucket_csv("model,n,bin,count,mean_norm", &s.norms)),
        ("training.csv", training),
    ]
}

/// Write `report/summary.json` and the CSV tables.
pub fn report(layout: &RunLayout, progress: Progress) -> Result<Summary> {
    let summary = collect(layout)?;
    let dir = layout.report_dir();
    write_json(&dir.join("summary.json"), &summary)?;
    for (name, csv) in tables(&summary) {
        write_file(&dir.join(name), csv)?;
    }
    progress(&format!("report: wrote {}", dir.display()));
    Ok(summary)
}

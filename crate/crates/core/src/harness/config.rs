//! The experiment configuration: one JSON document, every field required.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Column, SplitConfig};
use crate::error::{Error, Result};
use crate::metrics::MetricsConfig;
use crate::ngrams::MAX_ORDER;
use crate::probes::{LengthBins, NegativeSampling, ProbeConfig};
use crate::reconstruction::{ForcingGranularity, TrainConfig, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Tab-delimited pair file; relative paths resolve against the config file.
    pub path: PathBuf,
    pub column: Column,
    pub language: String,
    pub seed: u64,
    pub train_fraction: f64,
    pub train_cap: usize,
    pub test_cap: usize,
    pub max_sentence_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotaRule {
    /// ⌊capacity / n⌋ slots per order, leftovers by global frequency.
    EqualSplitBackfill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabConfig {
    /// Highest n-gram order any variant uses.
    pub max_order: usize,
    pub capacity: usize,
    pub quota: QuotaRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variants: Vec<Variant>,
    /// Embedding dimension K; must equal `hidden`.
    pub embedding_dim: usize,
    pub hidden: usize,
    pub tied: bool,
    pub lr: f64,
    pub epochs: usize,
    pub tf_prob: f64,
    pub tf_granularity: ForcingGranularity,
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSettings {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub frequency_buckets: Vec<usize>,
    pub length_bin_width: usize,
    pub length_max: usize,
    pub negatives: NegativeSampling,
    pub phrase_lengths: Vec<usize>,
    pub phrase_capacity: usize,
    pub dump_examples: bool,
    /// Models that also get the label-shuffle control run.
    pub control_variants: Vec<Variant>,
    pub control_permutations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSettings {
    pub bleu_max_order: usize,
    pub smoothing: bool,
    pub short_threshold: usize,
    pub max_decode_len: usize,
    pub norm_max_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub data: DataConfig,
    pub vocab: VocabConfig,
    pub model: ModelConfig,
    pub probes: ProbeSettings,
    pub metrics: MetricSettings,
    /// Relative paths resolve against the config file.
    pub output_dir: PathBuf,
}

fn invalid(msg: String) -> Error {
    Error::Config(msg)
}

impl ExperimentConfig {
    /// Parse, resolve relative paths against `path`'s directory and validate.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.data.path.is_relative() {
            cfg.data.path = base.join(&cfg.data.path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replace every seed with `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.data.seed = seed;
        self.model.seed = seed;
        self.probes.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.embedding_dim != m.hidden {
            return Err(invalid(format!(
                "model.embedding_dim ({}) must equal model.hidden ({}): the sentence vector is the decoder's initial state",
                m.embedding_dim, m.hidden
            )));
        }
        if m.hidden == 0 || m.epochs == 0 {
            return Err(invalid("model.hidden and model.epochs must be positive".into()));
        }
        if m.variants.is_empty() {
            return Err(invalid("model.variants is empty".into()));
        }
        if !(1..=MAX_ORDER).contains(&self.vocab.max_order) {
            return Err(invalid(format!("vocab.max_order {} outside 1..={MAX_ORDER}", self.vocab.max_order)));
        }
        for v in &m.variants {
            if v.vocab_order() > self.vocab.max_order {
                return Err(invalid(format!(
                    "variant {v} needs n-grams up to order {}, above vocab.max_order",
                    v.vocab_order()
                )));
            }
        }
        if self.vocab.capacity < self.vocab.max_order {
            return Err(invalid("vocab.capacity smaller than vocab.max_order".into()));
        }
        if !(0.0..=1.0).contains(&m.tf_prob) {
            return Err(invalid(format!("model.tf_prob {} outside [0, 1]", m.tf_prob)));
        }
        if !(m.lr >= 0.0 && m.lr.is_finite()) {
            return Err(invalid(format!("model.lr {} must be a finite non-negative number", m.lr)));
        }
        if !(0.0..=1.0).contains(&self.data.train_fraction) {
            return Err(invalid(format!("data.train_fraction {} outside [0, 1]", self.data.train_fraction)));
        }
        let p = &self.probes;
        if p.length_bin_width == 0 || p.length_max == 0 {
            return Err(invalid("probes.length_bin_width and probes.length_max must be positive".into()));
        }
        if p.frequency_buckets.first() != Some(&0) || p.frequency_buckets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("probes.frequency_buckets must start at 0 and increase strictly".into()));
        }
        if p.phrase_lengths.is_empty() || p.phrase_lengths.iter().any(|l| !(2..=MAX_ORDER).contains(l)) {
            return Err(invalid(format!("probes.phrase_lengths must be within 2..={MAX_ORDER}")));
        }
        if p.epochs == 0 {
            return Err(invalid("probes.epochs must be positive".into()));
        }
        let mt = &self.metrics;
        if mt.bleu_max_order == 0 {
            return Err(invalid("metrics.bleu_max_order must be positive".into()));
        }
        Ok(())
    }

    pub fn split(&self) -> SplitConfig {
        SplitConfig {
            seed: self.data.seed,
            train_fraction: self.data.train_fraction,
            train_cap: self.data.train_cap,
            test_cap: self.data.test_cap,
        }
    }

    /// Training settings for one variant; each variant gets its own seed stream.
    pub fn train_config(&self, variant: Variant) -> TrainConfig {
        TrainConfig {
            lr: self.model.lr,
            epochs: self.model.epochs,
            tf_prob: self.model.tf_prob,
            tf_granularity: self.model.tf_granularity,
            clip_norm: self.model.clip_norm,
            seed: variant_seed(self.model.seed, variant, "train"),
        }
    }

    pub fn probe_config(&self) -> ProbeConfig {
        let p = &self.probes;
        ProbeConfig {
            lr: p.lr,
            epochs: p.epochs,
            seed: p.seed,
            frequency_buckets: p.frequency_buckets.clone(),
            length_bins: LengthBins { width: p.length_bin_width, max: p.length_max },
            negatives: p.negatives,
            phrase_lengths: p.phrase_lengths.clone(),
            phrase_capacity: p.phrase_capacity,
        }
    }

    pub fn metrics_config(&self) -> MetricsConfig {
        let m = &self.metrics;
        MetricsConfig {
            bleu_max_order: m.bleu_max_order,
            smoothing: m.smoothing,
            short_threshold: m.short_threshold,
            max_decode_len: m.max_decode_len,
            norm_max_len: m.norm_max_len,
        }
    }
}

pub fn variant_seed(seed: u64, variant: Variant, purpose: &str) -> u64 {
    crate::numerics::Rng::stream(seed, crate::numerics::rng::tag(&format!("{purpose}/{variant}"))).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> String {
        include_str!("../../../../configs/desk.json").to_string()
    }

    #[test]
    fn shipped_presets_parse() {
        let desk = ExperimentConfig::from_json(&sample()).unwrap();
        assert_eq!(desk.model.hidden, 256);
        let full = ExperimentConfig::from_json(include_str!("../../../../configs/full.json")).unwrap();
        assert_eq!((full.data.train_cap, full.data.test_cap, full.model.epochs), (20_000, 5_000, 20));
        assert_eq!(full.model.variants, Variant::all());
    }

    #[test]
    fn missing_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample()).unwrap();
        v["model"].as_object_mut().unwrap().remove("tf_prob");
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert!(err.is_config() && err.to_string().contains("tf_prob"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample()).unwrap();
        v["model"]["dropout"] = 0.5.into();
        assert!(ExperimentConfig::from_json(&v.to_string()).unwrap_err().is_config());
    }

    #[test]
    fn inconsistent_values_are_rejected() {
        let cases: [(&str, &str, serde_json::Value); 5] = [
            ("model", "embedding_dim", 128.into()),
            ("model", "variants", serde_json::json!(["bag6"])),
            ("vocab", "max_order", 2.into()),
            ("model", "tf_prob", 1.5.into()),
            ("probes", "frequency_buckets", serde_json::json!([0, 500, 100])),
        ];
        for (section, key, value) in cases {
            let mut v: serde_json::Value = serde_json::from_str(&sample()).unwrap();
            v[section][key] = value;
            assert!(ExperimentConfig::from_json(&v.to_string()).unwrap_err().is_config(), "{section}.{key}");
        }
    }

    #[test]
    fn seeds_differ_per_variant_and_override_applies() {
        let mut c = ExperimentConfig::from_json(&sample()).unwrap();
        let a = c.train_config(Variant::BagOfNgrams(1)).seed;
        assert_ne!(a, c.train_config(Variant::BagOfNgrams(2)).seed);
        c.override_seed(99);
        assert_eq!((c.data.seed, c.model.seed, c.probes.seed), (99, 99, 99));
        assert_ne!(a, c.train_config(Variant::BagOfNgrams(1)).seed);
    }

    #[test]
    fn relative_paths_resolve_against_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, sample()).unwrap();
        let c = ExperimentConfig::load(&path).unwrap();
        assert!(c.data.path.starts_with(dir.path()));
        assert!(c.output_dir.starts_with(dir.path()));
    }
}

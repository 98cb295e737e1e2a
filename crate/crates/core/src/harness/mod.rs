//! Configuration, the prepare → train → eval → probe → report pipeline, and
//! report assembly.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::ExperimentConfig;
pub use pipeline::{
    control_variant, eval_variant, load_model, prepare, probe_all, probe_variant, run_all, run_jobs, train_all,
    train_variant, PrepareDiagnostics, Prepared, Progress, RunLayout, RunManifest,
};
pub use report::{collect, report, Summary, SUMMARY_SCHEMA};

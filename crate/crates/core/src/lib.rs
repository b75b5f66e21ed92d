//! Multilingual prompt compilation and interpretable evaluation.
//!
//! The crate is organised around the pipeline it serves:
//!
//! * [`language`] and [`sample`] hold the domain types: the ISO 639-1
//!   language registry (family and word-segmentation metadata) and task
//!   samples with their schemas.
//! * [`ingest`] reads line-delimited sample files and applies seeded
//!   per-language subsampling.
//! * [`template`] parses the prompt template DSL, selects templates for a
//!   prompt regime, compiles samples into encoder/decoder text pairs and maps
//!   generated text back onto labels.
//! * [`metrics`] implements language-aware normalization, token F1, exact
//!   match, accuracy and sentence-level BLEU.
//! * [`xeval`] computes per-sample features, four-way bucketing, per-bucket
//!   scores, dataset-level feature profiles, pairwise model diagnosis and the
//!   Wilcoxon signed-rank test.

pub mod error;
pub mod ingest;
pub mod language;
pub mod metrics;
pub mod report;
pub mod sample;
pub mod template;
pub mod xeval;

pub use error::{Error, Result};
pub use ingest::{read_samples, subsample, write_samples, DatasetDescriptor, Role, SamplingPolicy, Split};
pub use language::{family_of, lookup_language, Language, LanguageRegistry};
pub use sample::{MetricKind, Sample, TaskKind};
pub use template::{
    compile, decode_prediction, parse_template, render, select_templates, Decoded, LanguagePolicy,
    PromptedPair, Regime, Template, TemplateRegistry, Uniformity,
};

//! Generative data refinement.
//!
//! Builds checksum-valid PII benchmarks, rewrites records through pluggable
//! generative backends, and scores the results.

pub mod backend;
pub mod benchmark;
pub mod code;
pub mod detector;
pub mod engine;
pub mod evaluation;
pub mod format;
pub mod jsonl;
pub mod knowledge;
pub mod rng;

pub use backend::{Backend, BackendDescriptor, BackendError, BackendKind, CompletionRequest};
pub use benchmark::{BenchmarkSentence, Polarity, Shot, ShotBank, TemplateBank};
pub use engine::{RefineInput, RefineOptions, RefinedDataset, RefinementRecord, RefinementTask, TaskKind};
pub use format::{Catalog, FormatSpec};

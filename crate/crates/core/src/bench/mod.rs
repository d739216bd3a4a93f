//! End-to-end experiment orchestration behind the `rolsh-bench` binary.
//!
//! Stages form a chain, index → truth → train → eval → report, each
//! writing artifacts under the output directory and recording them with
//! content hashes in `manifest.json`. A stage whose inputs hash the same
//! as last time, and whose artifacts are intact, is skipped.

pub mod cli;
mod config;
mod demo;
mod manifest;
mod pipeline;

pub use config::{DatasetSpec, DemoConfig, ExperimentConfig};
pub use demo::{compare_searches, DemoReport, DemoRow, SearchSummary};
pub use manifest::{file_sha256, sha256_hex, Manifest, StageRecord, MANIFEST_FILE};
pub use pipeline::{run_experiment, run_query_demo, Pipeline, SplitManifest, Stage, FAILED_MARKER};

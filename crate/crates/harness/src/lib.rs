//! Batch evaluation of SISO and MISO enhancement pipelines on B-format
//! scenes: manifest loading, fixture synthesis, scoring and reports.

pub mod config;
pub mod eval;
pub mod fixtures;
pub mod manifest;
pub mod report;
pub mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Pipeline, RunConfig};
pub use eval::{run_eval, EvalReport, Failure, Record};
pub use manifest::{load_manifest, parse_manifest, read_manifest, ManifestEntry};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] sebench_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

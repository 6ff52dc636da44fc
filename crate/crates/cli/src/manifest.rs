//! Run manifests: everything needed to repeat a run.

use std::path::{Path, PathBuf};

use less_core::eval::{CvTimings, GridSpec};
use less_core::LessConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::io::{file_sha256, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub path: String,
    pub rows: usize,
    pub columns: usize,
    pub sha256: String,
}

impl DatasetFingerprint {
    pub fn of(path: &Path, rows: usize, columns: usize) -> CliResult<Self> {
        Ok(Self {
            path: path.display().to_string(),
            rows,
            columns,
            sha256: file_sha256(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Arguments after the program name; `less replay` re-executes them.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub config: Option<LessConfig>,
    pub grid: Option<GridSpec>,
    pub datasets: Vec<DatasetFingerprint>,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
    pub timings: Option<CvTimings>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args,
            seed: None,
            threads: rayon::current_num_threads(),
            config: None,
            grid: None,
            datasets: Vec::new(),
            outputs: Vec::new(),
            wall_seconds: 0.0,
            timings: None,
        }
    }

    pub fn with_config(mut self, config: &LessConfig) -> Self {
        self.seed = Some(config.seed);
        self.config = Some(config.clone());
        self
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }
}

/// `<output>.manifest.json` unless an explicit path is given.
pub fn manifest_path(explicit: Option<&Path>, output: &Path) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let mut s = output.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
    }
}

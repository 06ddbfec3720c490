//! JSON record of a run: the resolved config, its hash, the files produced
//! and timing. Written when the run starts and rewritten when it ends.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::RunError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub status: RunStatus,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// Output files, relative to the output directory, in write order.
    pub outputs: Vec<String>,
    /// Projections that stopped at the iteration cap; their best iterate was
    /// used.
    #[serde(default)]
    pub unconverged_projections: usize,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
    pub duration_secs: Option<f64>,
    pub error: Option<String>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn begin(config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: RunStatus::Running,
            seed: config.seed,
            config_hash: config.hash(),
            config: config.clone(),
            outputs: Vec::new(),
            unconverged_projections: 0,
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
            duration_secs: None,
            error: None,
        }
    }

    /// Marks the run finished, successfully or with `error`.
    pub fn finish(&mut self, error: Option<String>) {
        let end = now_ms();
        self.status = if error.is_some() {
            RunStatus::Failed
        } else {
            RunStatus::Complete
        };
        self.finished_unix_ms = Some(end);
        self.duration_secs = Some(end.saturating_sub(self.started_unix_ms) as f64 / 1000.0);
        self.error = error;
    }

    pub fn path_in(dir: &Path) -> PathBuf {
        dir.join(MANIFEST_FILE)
    }

    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        let path = Self::path_in(dir);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| RunError::io(path, e))
    }

    pub fn read(dir: &Path) -> Result<Self, RunError> {
        let path = Self::path_in(dir);
        let text = fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| RunError::Format {
            path,
            message: e.to_string(),
        })
    }
}

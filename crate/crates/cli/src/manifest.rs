use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

/// Record of one artifact-producing command, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub toolkit_version: &'static str,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn new(command: &str, config: Value, started_unix: f64) -> Self {
        Self {
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            toolkit_version: env!("CARGO_PKG_VERSION"),
            started_unix,
            finished_unix: started_unix,
        }
    }

    /// `<primary output>.manifest.json`.
    pub fn path_for(primary: &Path) -> PathBuf {
        let mut name = primary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        primary.with_file_name(name)
    }

    pub fn write(mut self, primary: &Path) -> Result<PathBuf> {
        self.finished_unix = now();
        let path = Self::path_for(primary);
        std::fs::write(&path, serde_json::to_string_pretty(&self)? + "\n")?;
        Ok(path)
    }
}

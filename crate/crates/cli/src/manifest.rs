use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::Config;

/// Record of one run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: Config,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Summary figures of the run, such as error against ground truth.
    pub results: Value,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: u64, config: &Config) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed,
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            results: Value::Null,
        }
    }

    /// `<dir>/run_manifest.json` for directory outputs, otherwise
    /// `<file>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        if output.is_dir() {
            output.join("run_manifest.json")
        } else {
            let mut name = output.file_name().unwrap_or_default().to_os_string();
            name.push(".manifest.json");
            output.with_file_name(name)
        }
    }

    pub fn write(&self, output: &Path) -> Result<PathBuf> {
        let path = Self::path_for(output);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Context, Result};

#[derive(Debug, Serialize)]
struct InputRecord {
    path: String,
    bytes: u64,
}

/// Record of inputs and settings written next to a command's outputs. Contains no
/// timestamps, so reruns with the same inputs produce the same file.
#[derive(Debug, Serialize)]
pub struct Manifest {
    command: String,
    version: &'static str,
    seed: u64,
    inputs: Vec<InputRecord>,
    outputs: Vec<String>,
    config: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: &BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        let bytes = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
        self.inputs.push(InputRecord {
            path: path.display().to_string(),
            bytes,
        });
    }

    pub fn output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Config, Derived};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: RunStatus,
    pub config_hash: String,
    pub config: Config,
    pub derived: Derived,
    pub outputs: Vec<OutputFile>,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse("manifest", e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// An output directory `<base>/<UTC timestamp>-<config hash prefix>`
/// collecting files for the manifest.
#[derive(Debug)]
pub struct RunDir {
    pub path: PathBuf,
    config: Config,
    command: String,
    started: DateTime<Utc>,
    clock: Instant,
    outputs: Vec<OutputFile>,
    notes: Vec<String>,
}

impl RunDir {
    pub fn create(base: &Path, config: &Config, command: &str) -> Result<Self> {
        let started = Utc::now();
        let name = format!("{}-{}", started.format("%Y%m%dT%H%M%S%.3fZ"), &config.hash()[..12]);
        Self::create_named(&base.join(name), config, command, started)
    }

    /// As [`RunDir::create`] with an explicit directory.
    pub fn create_at(path: &Path, config: &Config, command: &str) -> Result<Self> {
        Self::create_named(path, config, command, Utc::now())
    }

    fn create_named(path: &Path, config: &Config, command: &str, started: DateTime<Utc>) -> Result<Self> {
        std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
        Ok(RunDir {
            path: path.to_path_buf(),
            config: config.clone(),
            command: command.to_string(),
            started,
            clock: Instant::now(),
            outputs: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(self, status: RunStatus) -> Result<Manifest> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            status,
            config_hash: self.config.hash(),
            derived: self.config.derived(),
            config: self.config,
            outputs: self.outputs,
            started: self.started,
            finished: Utc::now(),
            wall_seconds: self.clock.elapsed().as_secs_f64(),
            notes: self.notes,
        };
        let path = self.path.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

//! Run manifests: everything needed to rerun a command, plus digests of
//! what it produced.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Command;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Artifact {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExternalInput {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Durations {
    pub offline_s: Option<f64>,
    pub online_s: Option<f64>,
    pub full_s: Option<f64>,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// Effective configuration after overrides, in the config file format.
    pub config: String,
    pub config_sha256: String,
    pub inputs: Vec<ExternalInput>,
    pub artifacts: Vec<Artifact>,
    pub durations: Durations,
    pub results: BTreeMap<String, serde_json::Value>,
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_bytes(&bytes))
}

impl RunManifest {
    pub fn new(command: Command, config: String) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config_sha256: sha256_bytes(config.as_bytes()),
            config,
            inputs: Vec::new(),
            artifacts: Vec::new(),
            durations: Durations::default(),
            results: BTreeMap::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.results.insert(key.to_string(), v);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(ExternalInput {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    /// Digests `name` inside `dir` and records it.
    pub fn artifact(&mut self, dir: &Path, name: &str) -> Result<()> {
        let full = dir.join(name);
        let meta = fs::metadata(&full).with_context(|| format!("artifact {}", full.display()))?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_file(&full)?,
            bytes: meta.len(),
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        for a in &self.artifacts {
            if sha256_file(&dir.join(&a.path))? != a.sha256 {
                bail!("artifact {} changed after it was recorded", a.path);
            }
        }
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

//! Run manifests: the resolved configuration, the seeds each stage drew
//! from, and a SHA-256 of every input read and artifact written.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::Failure;

pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const CONFIG_FILE: &str = "config.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub stage_seeds: BTreeMap<String, u64>,
    /// Subcommand options other than paths.
    pub options: BTreeMap<String, String>,
    /// Input role, then file name, then hash. File names are relative to
    /// the directory given for that role so manifests do not depend on
    /// where a run happened.
    pub inputs: BTreeMap<String, BTreeMap<String, String>>,
    pub artifacts: BTreeMap<String, String>,
    pub config: Config,
}

/// Files a command produced, keyed by file name.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: BTreeMap<String, Vec<u8>>,
    pub stage_seeds: BTreeMap<String, u64>,
    pub options: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, BTreeMap<String, String>>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.add(name, text);
    }

    pub fn seed(&mut self, stage: &str, value: u64) {
        self.stage_seeds.insert(stage.to_string(), value);
    }

    pub fn option(&mut self, key: &str, value: impl ToString) {
        self.options.insert(key.to_string(), value.to_string());
    }
}

/// Reads an input file and records its hash under `role`.
pub struct InputReader {
    pub inputs: BTreeMap<String, BTreeMap<String, String>>,
}

impl InputReader {
    pub fn new() -> Self {
        InputReader { inputs: BTreeMap::new() }
    }

    pub fn read(&mut self, role: &str, dir: &Path, name: &str) -> Result<Vec<u8>, Failure> {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        self.inputs.entry(role.to_string()).or_default().insert(name.to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, role: &str, dir: &Path, name: &str) -> Result<T, Failure> {
        let bytes = self.read(role, dir, name)?;
        serde_json::from_slice(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", dir.join(name).display())))
    }
}

/// Writes every artifact, the configuration snapshot and the manifest.
pub fn finish(out: &Path, command: &str, seed: u64, config: &Config, outputs: Outputs) -> Result<Manifest, Failure> {
    std::fs::create_dir_all(out).map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
    let mut files = outputs.files;
    files.insert(CONFIG_FILE.to_string(), config.to_toml().into_bytes());
    let mut artifacts = BTreeMap::new();
    for (name, bytes) in &files {
        write(&out.join(name), bytes)?;
        artifacts.insert(name.clone(), sha256_hex(bytes));
    }
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        stage_seeds: outputs.stage_seeds,
        options: outputs.options,
        inputs: outputs.inputs,
        artifacts,
        config: config.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&out.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

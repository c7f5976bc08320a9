//! Run manifest: seeds, config digest, and content hashes for every
//! artifact a run writes. Reports refuse to consume artifacts whose bytes
//! no longer match the manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Written once at the end of a pipeline stage group, after all artifacts
/// it references are on disk. Maps are ordered so serialization is stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    /// SHA-256 of the resolved config JSON as written to the run directory.
    pub config_digest: String,
    /// SHA-256 of the dataset source: the CSV file's bytes, or the
    /// serialized synthetic spec.
    pub data_digest: String,
    /// Every derived seed the run used, keyed by stage label.
    pub seeds: BTreeMap<String, u64>,
    /// Run-directory-relative artifact paths and their SHA-256 hashes.
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub fn new(config_digest: String, data_digest: String) -> Self {
        Manifest {
            config_digest,
            data_digest,
            seeds: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn record_seed(&mut self, stage: &str, seed: u64) {
        self.seeds.insert(stage.to_string(), seed);
    }

    /// Hashes `run_dir/relative` and records it under its relative path.
    /// Paths are stored with forward slashes regardless of platform.
    pub fn record_artifact(&mut self, run_dir: &Path, relative: &str) -> Result<()> {
        let hash = sha256_file(&run_dir.join(relative))?;
        self.artifacts.insert(relative.replace('\\', "/"), hash);
        Ok(())
    }

    pub fn save(&self, run_dir: &Path) -> Result<()> {
        let path = run_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Report(format!("manifest serialization: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(run_dir: &Path) -> Result<Self> {
        let path = run_dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }

    /// Confirms every referenced artifact exists and still hashes to its
    /// recorded value.
    pub fn verify(&self, run_dir: &Path) -> Result<()> {
        for (relative, expected) in &self.artifacts {
            let actual = sha256_file(&run_dir.join(relative))?;
            if &actual != expected {
                return Err(Error::Data(format!(
                    "artifact {relative} does not match its manifest hash"
                )));
            }
        }
        Ok(())
    }

    pub fn artifact_path(&self, run_dir: &Path, relative: &str) -> Result<PathBuf> {
        if !self.artifacts.contains_key(relative) {
            return Err(Error::Data(format!("manifest does not list {relative}")));
        }
        Ok(run_dir.join(relative))
    }
}

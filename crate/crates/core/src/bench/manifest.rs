use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of the stage's inputs: its config slice plus the upstream
    /// stage's hash.
    pub input_hash: String,
    pub seed: u64,
    pub wall_ms: f64,
    /// Output-relative path → SHA-256 of the content.
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub threads: usize,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn load(out: &Path) -> Result<Option<Self>> {
        let path = out.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_slice(&std::fs::read(path)?)?))
    }

    pub fn save(&self, out: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(out.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    /// Artifacts whose file is missing or whose content no longer matches
    /// the recorded hash, as output-relative paths.
    pub fn verify(&self, out: &Path) -> Vec<String> {
        self.stages
            .values()
            .flat_map(|s| s.artifacts.iter())
            .filter(|(rel, hash)| file_sha256(&out.join(rel)).map_or(true, |h| &h != *hash))
            .map(|(rel, _)| rel.clone())
            .collect()
    }

    /// True when `stage` was recorded with `input_hash` and all of its
    /// artifacts are intact.
    pub fn is_fresh(&self, stage: &str, input_hash: &str, out: &Path) -> bool {
        self.stages.get(stage).is_some_and(|s| {
            s.input_hash == input_hash
                && s
                    .artifacts
                    .iter()
                    .all(|(rel, hash)| file_sha256(&out.join(rel)).is_ok_and(|h| &h == hash))
        })
    }
}

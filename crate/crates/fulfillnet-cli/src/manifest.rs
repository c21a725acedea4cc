//! Run manifests: enough to reconstruct any run and checksum its artifacts.
//! No timestamps, so reruns produce bit-identical manifests.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub scale: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
}

#[derive(Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(command: &str, scale: u64, seed: Option<u64>) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().skip(1).collect(),
            scale,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(Artifact {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
    }

    pub fn record_output(&mut self, name: &str, bytes: &[u8]) {
        self.outputs.push(Artifact {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
    }

    pub fn write(&self, out_dir: &Path) -> std::io::Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serialization");
        bytes.push(b'\n');
        let path = out_dir.join("manifest.json");
        std::fs::write(&path, bytes)?;
        Ok(path)
    }
}

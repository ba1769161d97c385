//! Run manifest: resolved configuration, content hashes of every file the
//! run read or wrote, per-phase wall-clock timings, and final metrics.

use axnn::{Result, RunConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct FileStamp {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub created_unix: u64,
    pub config: RunConfig,
    pub inputs: Vec<FileStamp>,
    pub outputs: Vec<FileStamp>,
    pub timings_seconds: BTreeMap<String, f64>,
    pub final_metrics: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn stamp(path: &Path) -> Result<FileStamp> {
    Ok(FileStamp {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

impl RunManifest {
    pub fn new(config: RunConfig) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings_seconds: BTreeMap::new(),
            final_metrics: serde_json::Value::Null,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| axnn::Error::MalformedModel(format!("manifest serialization: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

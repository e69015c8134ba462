//! `manifest.json`: input hashes, effective config, versions and per-stage artifact hashes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifacts::{Outdir, MANIFEST};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, InputRecord>,
    /// stage → artifact path (relative to outdir) → sha256
    pub stages: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Records a finished stage, keeping entries of stages run earlier.
pub fn record_stage(out: &Outdir, cfg: &RunConfig, stage: &str, artifacts: &[String]) -> Result<()> {
    let mut m: Manifest = fs::read_to_string(out.path(MANIFEST))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default();
    m.tool = "corpus-lens".into();
    m.version = env!("CARGO_PKG_VERSION").into();
    m.core_version = corpus_lens::VERSION.into();
    m.config = serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    m.inputs.clear();
    for (name, p) in cfg.paths() {
        m.inputs.insert(
            name.to_string(),
            InputRecord { path: p.display().to_string(), sha256: sha256_file(p)? },
        );
    }
    let mut hashes = BTreeMap::new();
    for a in artifacts {
        hashes.insert(a.clone(), sha256_file(&out.path(a))?);
    }
    m.stages.insert(stage.to_string(), hashes);
    out.write_json(MANIFEST, &m)
}

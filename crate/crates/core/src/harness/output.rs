use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::bounds::Constants;
use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the config's canonical JSON serialization.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(cfg)?))
}

/// Written next to every set of CSV files; contains nothing run-dependent
/// beyond the config, so reruns reproduce it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    pub crate_version: String,
    pub constants_version: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub trials: u64,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

pub fn write_manifest(dir: &Path, cfg: &ExperimentConfig, files: &[String]) -> Result<PathBuf> {
    let manifest = RunManifest {
        kind: cfg.kind.name().to_string(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        constants_version: Constants::VERSION.to_string(),
        config_sha256: config_hash(cfg)?,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        files: files.to_vec(),
        config: cfg.clone(),
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

pub(crate) fn csv_file(dir: &Path, name: &str) -> Result<csv::Writer<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(csv::Writer::from_path(dir.join(name))?)
}

pub(crate) fn num(x: f64) -> String {
    x.to_string()
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

//! Run manifests: what was run, with which inputs, and digests of every output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// Relative to the directory holding the manifest, unless absolute.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub rng_algorithm: String,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the compact JSON form of `config`, with object keys sorted.
pub fn config_digest(config: &serde_json::Value) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("JSON values always serialize"))
}

fn base_dir(manifest_path: &Path) -> PathBuf {
    match manifest_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn recorded_path(manifest_path: &Path, output: &Path) -> String {
    let base = base_dir(manifest_path);
    let out_dir = base_dir(output);
    match (
        output.file_name(),
        fs::canonicalize(&base),
        fs::canonicalize(&out_dir),
    ) {
        (Some(name), Ok(a), Ok(b)) if a == b => name.to_string_lossy().into_owned(),
        _ => fs::canonicalize(output)
            .unwrap_or_else(|_| output.to_path_buf())
            .to_string_lossy()
            .into_owned(),
    }
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        seed: Option<u64>,
        rng_algorithm: &str,
    ) -> Self {
        Self {
            command: command.into(),
            config_digest: config_digest(&config),
            config,
            seed,
            tool_version: TOOL_VERSION.into(),
            rng_algorithm: rng_algorithm.into(),
            outputs: Vec::new(),
        }
    }

    /// Writes the manifest after hashing every output file from disk.
    pub fn write(mut self, manifest_path: &Path, outputs: &[&Path]) -> Result<Self> {
        self.outputs = outputs
            .iter()
            .map(|out| {
                let bytes =
                    fs::read(out).with_context(|| format!("reading output {}", out.display()))?;
                Ok(OutputDigest {
                    path: recorded_path(manifest_path, out),
                    sha256: sha256_hex(&bytes),
                })
            })
            .collect::<Result<_>>()?;
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        fs::write(manifest_path, text)
            .with_context(|| format!("writing manifest {}", manifest_path.display()))?;
        Ok(self)
    }
}

/// Default manifest location for an output file: `<out>.manifest.json`.
pub fn default_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Re-hashes the config and every listed output. Fails on the first mismatch.
pub fn verify_manifest(manifest_path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(manifest_path)
        .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
    let m: RunManifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing manifest {}", manifest_path.display()))?;
    let digest = config_digest(&m.config);
    if digest != m.config_digest {
        bail!(
            "config digest mismatch: recorded {}, recomputed {digest}",
            m.config_digest
        );
    }
    if m.outputs.is_empty() {
        bail!("manifest lists no outputs");
    }
    let base = base_dir(manifest_path);
    for out in &m.outputs {
        let path = base.join(&out.path);
        let bytes =
            fs::read(&path).with_context(|| format!("reading output {}", path.display()))?;
        let digest = sha256_hex(&bytes);
        if digest != out.sha256 {
            bail!(
                "digest mismatch for {}: recorded {}, recomputed {digest}",
                out.path,
                out.sha256
            );
        }
    }
    Ok(m)
}

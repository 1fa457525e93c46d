//! Run manifests: every command that writes files also records how it was
//! invoked, a hash of its input, and the produced paths, so `ips-lab rerun`
//! can reproduce the outputs byte-for-byte.

use crate::Command;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub instance_hash: String,
    pub wall_time_ms: u128,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: Command, instance_hash: String, wall_time_ms: u128, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: "ips-lab".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            instance_hash,
            wall_time_ms,
            outputs,
        }
    }
}

/// Manifest path convention: alongside the primary output.
pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

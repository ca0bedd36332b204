//! Run manifests embedded in every output.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// An input file and the SHA-256 of its contents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

impl InputRecord {
    pub fn new(path: &Path, bytes: &[u8]) -> Self {
        Self { path: path.display().to_string(), sha256: format!("{:x}", Sha256::digest(bytes)) }
    }
}

/// Inputs, fully resolved settings and versions of one run. The timestamp
/// is the only field that differs between identical runs, and it is
/// omitted when timing is disabled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: String,
    pub inputs: Vec<InputRecord>,
    pub settings: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unix_time: Option<u64>,
}

impl Manifest {
    pub fn new(command: &str, inputs: Vec<InputRecord>, settings: Value, timing: bool) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: metastable_core::VERSION,
            command: command.to_string(),
            inputs,
            settings,
            unix_time: timing.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())),
        }
    }
}

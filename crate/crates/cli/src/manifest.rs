use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Bumped whenever a sign or orientation convention changes.
pub const CONVENTIONS_VERSION: &str = "conventions-1";

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct InputDigest {
    /// File name without directories, so reports do not depend on the working directory.
    pub name: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        Self {
            name: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub parameters: Value,
    pub tool_version: String,
    pub conventions_version: String,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct Report {
    pub schema: String,
    pub manifest: RunManifest,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, inputs: Vec<InputDigest>, seed: Option<u64>, parameters: Value, result: Value) -> Self {
        Self {
            schema: format!("skein-lab/{}/v1", command.replace(' ', "-")),
            manifest: RunManifest {
                command: command.to_string(),
                inputs,
                seed,
                parameters,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                conventions_version: CONVENTIONS_VERSION.to_string(),
            },
            result,
        }
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

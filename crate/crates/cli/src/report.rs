use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// A JSON input file together with the digest of its exact bytes.
#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
    pub content: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<(T, InputFile)> {
    let display = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: display.clone(), source })?;
    let content: Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{display}: invalid JSON: {e}")))?;
    let parsed = T::deserialize(&content).map_err(|e| CliError::Input(format!("{display}: {e}")))?;
    Ok((parsed, InputFile { path: display, sha256: sha256_hex(&bytes), content }))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<InputFile>,
    pub resolution: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parameters: Value,
}

/// Execution details; these are the only fields allowed to differ between
/// otherwise identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Inputs,
    pub tolerances: Value,
    pub outputs: Value,
    pub rng: String,
    pub timing: Timing,
}

impl RunReport {
    pub fn write(&self, out: Option<&Path>) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Input(format!("serializing report: {e}")))?;
        match out {
            Some(path) => fs::write(path, text + "\n")
                .map_err(|source| CliError::Io { path: path.display().to_string(), source }),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads serialize to JSON")
}

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use unirp::{Instance, LoadOptions};

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub values: Vec<f64>,
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub max: f64,
}

/// One machine-readable report per checked file.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input: String,
    pub input_digest: String,
    pub verdict: &'static str,
    pub certificate: Option<Certificate>,
    pub residuals: Residuals,
    pub witness: Option<serde_json::Value>,
    pub ms: u128,
    pub version: &'static str,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads, parses and validates a dataset, returning it with its content digest.
pub fn load(path: &Path, renormalize: bool) -> Result<(Instance, String)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let inst = Instance::from_json(&text, LoadOptions { renormalize })
        .with_context(|| format!("loading {}", path.display()))?;
    Ok((inst, digest(text.as_bytes())))
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

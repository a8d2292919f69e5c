use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance written next to every set of reports. Output paths are
/// relative to the directory holding the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, inputs: Vec<String>, config: impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            inputs,
            config: serde_json::to_value(config)?,
            outputs: Vec::new(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(Error::io(&path))
    }
}

//! Run manifests written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct DictionaryChecksum {
    pub kind: String,
    pub n: usize,
    pub columns: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub options: serde_json::Value,
    pub version: String,
    pub dictionaries: Vec<DictionaryChecksum>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(subcommand: &str, options: &impl Serialize) -> Result<Self, CliError> {
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            options: serde_json::to_value(options).map_err(|e| CliError::Input(e.to_string()))?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            dictionaries: Vec::new(),
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
        })
    }

    /// `<output>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write_next_to(&self, output: &Path) -> Result<PathBuf, CliError> {
        let path = Self::path_for(output);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Input(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Writes `text` to `path` and records a manifest beside it.
pub fn write_output(path: &Path, text: &str, manifest: &mut RunManifest, started: std::time::Instant) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    manifest.outputs.push(path.to_path_buf());
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    manifest.write_next_to(path)?;
    Ok(())
}

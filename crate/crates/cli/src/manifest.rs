use std::path::Path;

use serde::Serialize;

use crate::config::Layer;
use crate::error::CliError;

/// Provenance record written next to every result file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub output_dir: String,
    pub master_seed: Option<u64>,
    pub tool_version: String,
    pub preset: Option<String>,
    pub settings: Layer,
}

impl RunManifest {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            config_path: None,
            output_dir: output_dir.display().to_string(),
            master_seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            preset: None,
            settings: Layer::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

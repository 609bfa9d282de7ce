//! Experiment configurations as JSON.

use std::path::Path;

use riskflow_core::scenario::ExperimentConfig;

use crate::error::{Error, Result};

pub fn parse_config(text: &str, label: &Path) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        serde_json::from_str(text).map_err(|source| Error::Json { path: label.to_path_buf(), source })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// Pretty JSON with a trailing newline; stable across runs.
pub fn to_json(config: &ExperimentConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}

pub fn save_config(config: &ExperimentConfig, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(config)).map_err(|e| Error::io(path, e))
}

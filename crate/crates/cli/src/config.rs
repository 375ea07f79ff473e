//! Suite configuration files (TOML).

use std::collections::HashSet;
use std::path::PathBuf;

use levy_variation::mc_harness::ExperimentConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("experiment `{experiment}`: {source}")]
    Invalid {
        experiment: String,
        #[source]
        source: levy_variation::Error,
    },

    #[error("experiment name `{0}` must be non-empty and use only letters, digits, `-`, `_` and `.`")]
    BadName(String),

    #[error("duplicate experiment name `{0}`")]
    Duplicate(String),
}

impl ConfigError {
    /// The offending parameter for validation errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { source: levy_variation::Error::InvalidParameter { field, .. }, .. } => Some(field),
            _ => None,
        }
    }
}

/// Which artifacts `verify` writes per experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Formats {
    #[serde(default = "yes")]
    pub json: bool,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub plot: bool,
}

fn yes() -> bool {
    true
}

impl Default for Formats {
    fn default() -> Self {
        Formats { json: true, csv: true, plot: true }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub formats: Formats,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut seen = HashSet::new();
        for e in &self.experiments {
            let ok = !e.name.is_empty() && e.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
            if !ok || e.name.starts_with('.') {
                return Err(ConfigError::BadName(e.name.clone()));
            }
            if !seen.insert(e.name.as_str()) {
                return Err(ConfigError::Duplicate(e.name.clone()));
            }
            e.validate().map_err(|source| ConfigError::Invalid { experiment: e.name.clone(), source })?;
        }
        Ok(())
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_config(text: &str) -> Result<SuiteConfig, ConfigError> {
    let cfg: SuiteConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse { line, column, message: e.message().trim().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

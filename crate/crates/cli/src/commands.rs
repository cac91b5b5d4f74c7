use std::fs;
use std::path::{Path, PathBuf};

use familiar_core::config::parse_config;
use familiar_core::session::{export_ndjson, replay_documents, Metrics, ReplayError};
use familiar_core::{Config, ConfigError, SessionOptions};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {} error(s)", .0.len())]
    Config(Vec<ConfigError>),
    #[error("{0}")]
    Script(String),
    #[error("server failed: {0}")]
    Server(std::io::Error),
}

impl CliError {
    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Config(errors) => json!(errors),
            CliError::Read { path, source } | CliError::Write { path, source } => {
                json!([{ "path": path.display().to_string(), "code": "IoError", "message": source.to_string() }])
            }
            CliError::Script(detail) => json!([{ "path": "", "code": "ScriptError", "message": detail }]),
            CliError::Server(e) => json!([{ "path": "", "code": "ServerError", "message": e.to_string() }]),
        }
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write { path: path.to_owned(), source })
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    parse_config(&read(path)?).map_err(CliError::Config)
}

pub fn validate_file(path: &Path) -> Result<Config, CliError> {
    load_config(path)
}

#[derive(Debug)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub log_lines: usize,
}

/// Replays `script` headlessly, writes the metrics object to `out` and, if
/// asked, the full session log as NDJSON.
pub fn run_script(
    config: &Path,
    script: &Path,
    out: &Path,
    log: Option<&Path>,
    options: SessionOptions,
) -> Result<RunOutput, CliError> {
    let outcome = replay_documents(&read(config)?, &read(script)?, options).map_err(|e| match e {
        ReplayError::Config(errors) => CliError::Config(errors),
        other => CliError::Script(other.to_string()),
    })?;
    let mut text = serde_json::to_string_pretty(&outcome.metrics).expect("metrics serialize");
    text.push('\n');
    write(out, &text)?;
    if let Some(path) = log {
        write(path, &export_ndjson(&outcome.log))?;
    }
    Ok(RunOutput { metrics: outcome.metrics, log_lines: outcome.log.len() })
}

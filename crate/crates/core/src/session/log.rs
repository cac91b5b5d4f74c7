//! Append-only session log, exported as NDJSON.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::CommandClass;
use super::wire::{ClientMessage, ServerMessage};
use crate::guidance::EngineEvent;
use crate::sim::SimEvent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Client { tick: u64, message: ClientMessage },
    Server { tick: u64, message: ServerMessage },
    Engine { tick: u64, event: EngineEvent },
    Sim { tick: u64, event: SimEvent },
    Command {
        tick: u64,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intent: Option<String>,
        class: CommandClass,
    },
}

impl LogRecord {
    pub fn tick(&self) -> u64 {
        match self {
            LogRecord::Client { tick, .. }
            | LogRecord::Server { tick, .. }
            | LogRecord::Engine { tick, .. }
            | LogRecord::Sim { tick, .. }
            | LogRecord::Command { tick, .. } => *tick,
        }
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
}

pub fn export_ndjson(log: &[LogRecord]) -> String {
    let mut out = String::new();
    for rec in log {
        out.push_str(&serde_json::to_string(rec).expect("log records are serializable"));
        out.push('\n');
    }
    out
}

pub fn import_ndjson(text: &str) -> Result<Vec<LogRecord>, LogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| LogError::Parse { line: i + 1, source }))
        .collect()
}

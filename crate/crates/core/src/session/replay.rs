//! Deterministic scripted runs. A script is NDJSON: one client message per
//! line, each carrying the `tick` at which it is delivered.

use thiserror::Error;

use super::log::LogRecord;
use super::metrics::Metrics;
use super::wire::{ClientEnvelope, ClientMessage};
use super::{Phase, Session, SessionOptions, SessionSnapshot};
use crate::config::{parse_config, Config, ConfigError};

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptEntry {
    pub tick: u64,
    pub message: ClientMessage,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("config rejected with {} error(s)", .0.len())]
    Config(Vec<ConfigError>),
    #[error("script line {line}: {detail}")]
    Script { line: usize, detail: String },
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptEntry>, ReplayError> {
    let mut entries = Vec::new();
    let mut last = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let env = ClientEnvelope::parse(line).map_err(|detail| ReplayError::Script { line: line_no, detail })?;
        let tick = env.tick.ok_or_else(|| ReplayError::Script { line: line_no, detail: "missing tick".into() })?;
        if tick < last {
            return Err(ReplayError::Script { line: line_no, detail: format!("tick {tick} goes backwards from {last}") });
        }
        last = tick;
        entries.push(ScriptEntry { tick, message: env.message });
    }
    Ok(entries)
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub metrics: Metrics,
    pub snapshot: SessionSnapshot,
    pub log: Vec<LogRecord>,
}

/// Runs `script` against a fresh session until it succeeds or times out.
/// Messages scheduled at tick `t` are handled before the session advances
/// past `t`; messages scheduled after the end are never delivered.
pub fn replay(script: &[ScriptEntry], config: &Config, options: SessionOptions) -> ReplayOutcome {
    let mut session = Session::new(config.clone(), options);
    let mut next = 0;
    while session.phase() == Phase::Running {
        while next < script.len() && script[next].tick <= session.tick_count() {
            session.handle_message(script[next].message.clone());
            next += 1;
        }
        if session.phase() != Phase::Running {
            break;
        }
        session.tick();
    }
    ReplayOutcome { metrics: session.metrics(), snapshot: session.snapshot(), log: session.log().to_vec() }
}

pub fn replay_documents(config_text: &str, script_text: &str, options: SessionOptions) -> Result<ReplayOutcome, ReplayError> {
    let config = parse_config(config_text).map_err(ReplayError::Config)?;
    let script = parse_script(script_text)?;
    Ok(replay(&script, &config, options))
}

/// Rebuilds the final session state from the client messages in a log.
pub fn reconstruct(log: &[LogRecord], config: &Config, options: SessionOptions) -> SessionSnapshot {
    let mut session = Session::new(config.clone(), options);
    let advance_to = |session: &mut Session, tick: u64| {
        while session.tick_count() < tick && session.phase() == Phase::Running {
            session.tick();
        }
    };
    for rec in log {
        if let LogRecord::Client { tick, message } = rec {
            advance_to(&mut session, *tick);
            session.handle_message(message.clone());
        }
    }
    if let Some(last) = log.last() {
        advance_to(&mut session, last.tick());
    }
    session.snapshot()
}

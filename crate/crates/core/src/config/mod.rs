//! The scenario configuration document: sensors, intents, action catalogue,
//! apartment geometry and interaction protocols.
//!
//! [`parse_config`] walks the JSON tree by hand so that every problem is
//! reported with its document path, not just the first one. [`validate`]
//! runs the semantic checks on an already typed [`Config`], and
//! [`serialize`] renders the canonical form.

mod parse;
mod serialize;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::guidance::{GuidanceEngine, InteractionProtocol, INTENT_KEY, PENDING_SLOT_PREFIX};
use crate::nlu::IntentDef;
use crate::perception::{Extractor, SemanticSensorDef};
use crate::sim::{Apartment, Point, SimSettings};

pub(crate) use parse::parse_behavior;
pub use parse::parse_config;
pub use serialize::{serialize, to_json};
pub use validate::validate;

pub const SCHEMA_VERSION: u64 = 1;

/// Shipped region-teaching scenario.
pub const DEFAULT_CONFIG: &str = include_str!("../../data/default_config.json");

/// World keys written by the session every tick or on chat input.
pub const BUILTIN_WORLD_KEYS: &[&str] = &[
    "distance_to_avatar",
    "avatar_pose",
    "robot_pose",
    "following",
    "regions_taught",
    "last_taught_label",
    INTENT_KEY,
    "last_utterance",
    "battery_low",
];

/// Prefix of the per-label `region.<label>` keys set once a region is taught.
pub const REGION_KEY_PREFIX: &str = "region.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDef {
    pub name: String,
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub apartment: Apartment,
    pub robot_start: Point,
    pub avatar_start: Point,
    pub perception_radius: f64,
    pub speed: f64,
    pub tau: f64,
    pub time_limit_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub version: u64,
    pub sensors: Vec<SemanticSensorDef>,
    pub intents: Vec<IntentDef>,
    pub actions: Vec<ActionDef>,
    pub apartment: ScenarioConfig,
    pub protocols: Vec<InteractionProtocol>,
}

impl Config {
    pub fn default_scenario() -> Config {
        parse_config(DEFAULT_CONFIG).expect("shipped config is valid")
    }

    pub fn sim_settings(&self) -> SimSettings {
        SimSettings {
            apartment: self.apartment.apartment.clone(),
            robot_start: self.apartment.robot_start,
            avatar_start: self.apartment.avatar_start,
            perception_radius: self.apartment.perception_radius,
            speed: self.apartment.speed,
            tau: self.apartment.tau,
        }
    }

    /// Region labels that must all be taught for the session to succeed.
    pub fn goal_labels(&self) -> Vec<String> {
        self.apartment.apartment.rooms.iter().map(|r| r.name.clone()).collect()
    }

    pub fn build_engine(&self) -> GuidanceEngine {
        let mut engine = GuidanceEngine::new(self.protocols.clone());
        engine.set_intent_sensors(
            self.sensors
                .iter()
                .filter(|s| s.extractor.key() == INTENT_KEY && !matches!(s.extractor, Extractor::Count { .. }))
                .map(|s| s.id.clone()),
        );
        engine
    }

    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// Whether `key` is a world key something in this config can write.
    pub fn is_known_world_key(&self, key: &str) -> bool {
        BUILTIN_WORLD_KEYS.contains(&key)
            || key.strip_prefix(REGION_KEY_PREFIX).is_some_and(|l| !l.is_empty())
            || self.intents.iter().flat_map(|i| &i.slots).any(|slot| {
                key == slot || key.strip_prefix(PENDING_SLOT_PREFIX) == Some(slot.as_str())
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    DuplicateId,
    UnknownReference,
    NoEntry,
    MultipleEntries,
    NoExit,
    PredecessorCycle,
    BadValue,
    SyntaxError,
}

/// One problem found in a configuration document. `path` is a
/// slash-separated location such as `/protocols/0/behaviors/1/predecessors/0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigError {
    pub path: String,
    pub code: ErrorCode,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, code: ErrorCode, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), code, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{:?}]: {}", self.path, self.code, self.message)
    }
}

impl std::error::Error for ConfigError {}

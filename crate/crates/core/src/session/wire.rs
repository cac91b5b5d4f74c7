//! Wire messages exchanged with clients, one JSON object per line/frame.

use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use super::SessionSnapshot;
use crate::config::ConfigError;
use crate::guidance::EngineEvent;
use crate::sim::{FloorGrid, RejectReason, SimEvent};
use crate::value::SensorValue;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Chat { text: String },
    MoveAvatar { x: f64, y: f64 },
    DefineBehavior { protocol_id: String, behavior: serde_json::Value },
    GetSnapshot {},
    Reset {},
}

/// A client message as it arrives on the wire; `seq` and `tick` are optional
/// on input and ignored apart from scripted replay, which requires `tick`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientEnvelope {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tick: Option<u64>,
    #[serde(flatten)]
    pub message: ClientMessage,
}

impl ClientEnvelope {
    pub fn parse(line: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
        let Some(obj) = value.as_object() else {
            return Err("message must be a JSON object".into());
        };
        let mut body = obj.clone();
        let seq = take_u64(&mut body, "seq")?;
        let tick = take_u64(&mut body, "tick")?;
        let message = serde_json::from_value(serde_json::Value::Object(body)).map_err(|e| format!("bad message: {e}"))?;
        Ok(ClientEnvelope { seq, tick, message })
    }
}

fn take_u64(obj: &mut serde_json::Map<String, serde_json::Value>, key: &str) -> Result<Option<u64>, String> {
    match obj.remove(key) {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| format!("{key} must be a non-negative integer")),
    }
}

/// Events that exist only for clients: sensor values and floor coloring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViewEvent {
    SensorUpdate { sensor: String, value: SensorValue },
    FloorUpdate { grid: FloorGrid },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EventBody {
    Engine(EngineEvent),
    Sim(SimEvent),
    View(ViewEvent),
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::Engine(EngineEvent::PreconditionChanged { .. }) => "precondition",
            EventBody::Engine(EngineEvent::BehaviorStatus { .. }) => "behavior_status",
            EventBody::Engine(EngineEvent::ProtocolStatus { .. }) => "protocol_status",
            EventBody::Engine(EngineEvent::ActionDispatched { .. }) => "action_dispatched",
            EventBody::Sim(SimEvent::RobotMoved { .. }) => "robot_moved",
            EventBody::Sim(SimEvent::ActionCompleted { .. }) => "action_completed",
            EventBody::Sim(SimEvent::AvatarSighted) => "avatar_sighted",
            EventBody::Sim(SimEvent::AvatarLost) => "avatar_lost",
            EventBody::Sim(SimEvent::RobotSaid { .. }) => "robot_said",
            EventBody::Sim(SimEvent::RegionLearned { .. }) => "region_learned",
            EventBody::View(ViewEvent::SensorUpdate { .. }) => "sensor_update",
            EventBody::View(ViewEvent::FloorUpdate { .. }) => "floor_update",
        }
    }

    /// Kinds that carry live architecture state and are withheld when the
    /// dynamic visualization is switched off.
    pub fn is_dynamic(&self) -> bool {
        matches!(self.kind(), "sensor_update" | "precondition" | "behavior_status")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerBody {
    ChatAck {
        recognized: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intent: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slots: Option<std::collections::BTreeMap<String, String>>,
    },
    RobotSay { text: String },
    AvatarMoved { x: f64, y: f64 },
    MoveRejected { reason: RejectReason },
    Event(EventBody),
    Notice { text: String },
    Snapshot { snapshot: Box<SessionSnapshot> },
    DefineRejected { errors: Vec<ConfigError> },
    SessionEnded { success: bool, metrics: Metrics },
    ProtocolError { detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerMessage {
    pub seq: u64,
    pub tick: u64,
    #[serde(flatten)]
    pub body: ServerBody,
}

impl ServerMessage {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages are serializable")
    }
}

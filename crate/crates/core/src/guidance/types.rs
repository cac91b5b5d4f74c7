use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::value::SensorValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareOp {
    Eq,
    Ne,
}

impl CompareOp {
    pub fn holds(self, actual: &SensorValue, expected: &SensorValue) -> bool {
        match self {
            CompareOp::Eq => actual == expected,
            CompareOp::Ne => actual != expected,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CompareOp::Eq => "eq",
            CompareOp::Ne => "ne",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eq" => Some(CompareOp::Eq),
            "ne" => Some(CompareOp::Ne),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreconditionStatus {
    Unknown,
    Satisfied,
    Unsatisfied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precondition {
    pub sensor: String,
    pub op: CompareOp,
    pub expected: SensorValue,
    pub status: PreconditionStatus,
}

impl Precondition {
    pub fn new(sensor: impl Into<String>, op: CompareOp, expected: impl Into<SensorValue>) -> Self {
        Precondition {
            sensor: sensor.into(),
            op,
            expected: expected.into(),
            status: PreconditionStatus::Unknown,
        }
    }

    pub fn eq(sensor: impl Into<String>, expected: impl Into<SensorValue>) -> Self {
        Self::new(sensor, CompareOp::Eq, expected)
    }
}

/// Where an action parameter gets its value from.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamBinding {
    Static(SensorValue),
    FromWorld(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionSpec {
    pub name: String,
    pub params: BTreeMap<String, ParamBinding>,
}

impl ActionSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ActionSpec { name: name.into(), params: BTreeMap::new() }
    }

    pub fn with_static(mut self, param: &str, value: impl Into<SensorValue>) -> Self {
        self.params.insert(param.to_string(), ParamBinding::Static(value.into()));
        self
    }

    pub fn with_world(mut self, param: &str, key: &str) -> Self {
        self.params.insert(param.to_string(), ParamBinding::FromWorld(key.to_string()));
        self
    }
}

/// An action with every parameter bound to a value, ready for the executor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteAction {
    pub name: String,
    pub params: BTreeMap<String, SensorValue>,
}

impl ConcreteAction {
    pub fn param(&self, name: &str) -> Option<&SensorValue> {
        self.params.get(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviorStatus {
    Idle,
    Executable,
    Executing,
    Finished,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    pub id: String,
    pub title: String,
    pub is_entry: bool,
    pub is_exit: bool,
    pub preconditions: Vec<Precondition>,
    pub predecessors: Vec<String>,
    pub action: ActionSpec,
    pub status: BehaviorStatus,
    pub def_index: usize,
}

impl Behavior {
    pub fn new(id: impl Into<String>, action: ActionSpec) -> Self {
        let id = id.into();
        Behavior {
            title: id.clone(),
            id,
            is_entry: false,
            is_exit: false,
            preconditions: Vec::new(),
            predecessors: Vec::new(),
            action,
            status: BehaviorStatus::Idle,
            def_index: 0,
        }
    }

    pub fn entry(mut self) -> Self {
        self.is_entry = true;
        self
    }

    pub fn exit(mut self) -> Self {
        self.is_exit = true;
        self
    }

    pub fn after(mut self, predecessor: &str) -> Self {
        self.predecessors.push(predecessor.to_string());
        self
    }

    pub fn when(mut self, pre: Precondition) -> Self {
        self.preconditions.push(pre);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolStatus {
    Inactive,
    Active,
    Suspended,
    Completed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionProtocol {
    pub id: String,
    pub name: String,
    pub priority: u32,
    pub behaviors: Vec<Behavior>,
    pub status: ProtocolStatus,
    pub last_finished: Option<String>,
}

impl InteractionProtocol {
    /// Builds an inactive protocol; `def_index` is assigned from list order.
    pub fn new(id: impl Into<String>, priority: u32, behaviors: Vec<Behavior>) -> Self {
        let id = id.into();
        let mut ip = InteractionProtocol {
            name: id.clone(),
            id,
            priority,
            behaviors,
            status: ProtocolStatus::Inactive,
            last_finished: None,
        };
        ip.reindex();
        ip
    }

    pub fn reindex(&mut self) {
        for (i, b) in self.behaviors.iter_mut().enumerate() {
            b.def_index = i;
        }
    }

    pub fn behavior(&self, id: &str) -> Option<&Behavior> {
        self.behaviors.iter().find(|b| b.id == id)
    }

    pub fn entry(&self) -> Option<&Behavior> {
        self.behaviors.iter().find(|b| b.is_entry)
    }

    pub fn has_executable(&self) -> bool {
        self.behaviors.iter().any(|b| b.status == BehaviorStatus::Executable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub protocol_id: String,
    pub behavior_id: String,
}

/// State change notifications, emitted in the order the changes happen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EngineEvent {
    #[serde(rename = "precondition")]
    PreconditionChanged { behavior_id: String, index: usize, status: PreconditionStatus },
    BehaviorStatus { behavior_id: String, status: BehaviorStatus },
    ProtocolStatus { protocol_id: String, status: ProtocolStatus },
    ActionDispatched { behavior_id: String, action: ConcreteAction },
}

impl EngineEvent {
    pub fn dispatched_action(&self) -> Option<&ConcreteAction> {
        match self {
            EngineEvent::ActionDispatched { action, .. } => Some(action),
            _ => None,
        }
    }
}

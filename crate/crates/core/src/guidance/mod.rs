//! Behavior guidance: interaction protocols, precondition evaluation,
//! behavior selection and the execution lifecycle.
//!
//! The engine is a single owner of all protocol state. Each public operation
//! mutates it sequentially and returns the [`EngineEvent`]s describing what
//! changed, in order. Only one behavior may be executing at any time; a
//! running behavior is never interrupted; priority preemption happens at the
//! next selection.

mod select;
mod snapshot;
mod types;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::perception::{SensorSnapshot, WorldState};

pub use snapshot::{BehaviorView, EngineSnapshot, ProtocolView};
pub use types::*;

/// World key holding the most recently recognized intent.
pub const INTENT_KEY: &str = "last_intent";
/// Prefix under which slots of the not-yet-consumed intent are parked.
pub const PENDING_SLOT_PREFIX: &str = "pending.";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GuidanceError {
    #[error("a behavior is already executing")]
    ExecutorBusy,
    #[error("behavior {0} is no longer executable")]
    StaleSelection(String),
    #[error("behavior {0} is not executing")]
    NotExecuting(String),
    #[error("world state has no value for {key}")]
    MissingWorldKey { key: String },
    #[error("precondition refers to undeclared sensor {0}")]
    UnknownSensor(String),
    #[error("unknown protocol {0}")]
    UnknownProtocol(String),
    #[error("unknown behavior {0}")]
    UnknownBehavior(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GuidanceEngine {
    protocols: Vec<InteractionProtocol>,
    executing: Option<(String, String)>,
    suspended_stack: Vec<String>,
    intent_sensors: BTreeSet<String>,
}

impl GuidanceEngine {
    /// Creates an engine over protocols in config order. Statuses are taken
    /// as given; callers normally pass freshly loaded (inactive) protocols.
    pub fn new(protocols: Vec<InteractionProtocol>) -> Self {
        GuidanceEngine {
            protocols,
            executing: None,
            suspended_stack: Vec::new(),
            intent_sensors: [INTENT_KEY.to_string()].into_iter().collect(),
        }
    }

    /// Sensor ids whose preconditions consume the pending intent when a
    /// guarded behavior starts.
    pub fn set_intent_sensors(&mut self, sensors: impl IntoIterator<Item = String>) {
        self.intent_sensors = sensors.into_iter().collect();
    }

    pub fn protocols(&self) -> &[InteractionProtocol] {
        &self.protocols
    }

    pub fn protocol(&self, id: &str) -> Option<&InteractionProtocol> {
        self.protocols.iter().find(|p| p.id == id)
    }

    pub fn executing(&self) -> Option<(&str, &str)> {
        self.executing.as_ref().map(|(p, b)| (p.as_str(), b.as_str()))
    }

    pub fn suspended_stack(&self) -> &[String] {
        &self.suspended_stack
    }

    pub fn active_protocol(&self) -> Option<&InteractionProtocol> {
        self.protocols.iter().find(|p| p.status == ProtocolStatus::Active)
    }

    pub fn behavior(&self, id: &str) -> Option<(&InteractionProtocol, &Behavior)> {
        self.protocols
            .iter()
            .find_map(|p| p.behavior(id).map(|b| (p, b)))
    }

    /// Number of behaviors currently holding [`BehaviorStatus::Executing`].
    pub fn executing_count(&self) -> usize {
        self.protocols
            .iter()
            .flat_map(|p| &p.behaviors)
            .filter(|b| b.status == BehaviorStatus::Executing)
            .count()
    }

    fn protocol_index(&self, id: &str) -> Result<usize, GuidanceError> {
        self.protocols
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| GuidanceError::UnknownProtocol(id.to_string()))
    }

    /// Appends a behavior to a live protocol. The new behavior starts idle.
    pub fn append_behavior(&mut self, protocol_id: &str, mut behavior: Behavior) -> Result<(), GuidanceError> {
        let pi = self.protocol_index(protocol_id)?;
        let ip = &mut self.protocols[pi];
        behavior.def_index = ip.behaviors.len();
        behavior.status = BehaviorStatus::Idle;
        for pre in &mut behavior.preconditions {
            pre.status = PreconditionStatus::Unknown;
        }
        ip.behaviors.push(behavior);
        Ok(())
    }

    /// Recomputes precondition and executability state from a sensor snapshot.
    ///
    /// Every behavior of an active or suspended protocol is evaluated, as is
    /// the entry behavior of an inactive one. Everything else has its
    /// preconditions reset to unknown. Executing and finished behaviors keep
    /// their status.
    pub fn update_preconditions(&mut self, snapshot: &SensorSnapshot) -> Result<Vec<EngineEvent>, GuidanceError> {
        let mut events = Vec::new();
        for ip in &mut self.protocols {
            let ip_status = ip.status;
            let finished: BTreeSet<String> = ip
                .behaviors
                .iter()
                .filter(|b| b.status == BehaviorStatus::Finished)
                .map(|b| b.id.clone())
                .collect();
            for b in &mut ip.behaviors {
                let in_scope = match ip_status {
                    ProtocolStatus::Active | ProtocolStatus::Suspended => true,
                    ProtocolStatus::Inactive => b.is_entry,
                    ProtocolStatus::Completed => false,
                };
                for (index, pre) in b.preconditions.iter_mut().enumerate() {
                    let status = if in_scope {
                        let actual = snapshot
                            .get(&pre.sensor)
                            .ok_or_else(|| GuidanceError::UnknownSensor(pre.sensor.clone()))?;
                        if pre.op.holds(actual, &pre.expected) {
                            PreconditionStatus::Satisfied
                        } else {
                            PreconditionStatus::Unsatisfied
                        }
                    } else {
                        PreconditionStatus::Unknown
                    };
                    if pre.status != status {
                        pre.status = status;
                        events.push(EngineEvent::PreconditionChanged {
                            behavior_id: b.id.clone(),
                            index,
                            status,
                        });
                    }
                }
                let ready = in_scope
                    && b.preconditions.iter().all(|p| p.status == PreconditionStatus::Satisfied)
                    && b.predecessors.iter().all(|p| finished.contains(p));
                let next = match (b.status, ready) {
                    (BehaviorStatus::Idle, true) => BehaviorStatus::Executable,
                    (BehaviorStatus::Executable, false) => BehaviorStatus::Idle,
                    (s, _) => s,
                };
                if next != b.status {
                    b.status = next;
                    events.push(EngineEvent::BehaviorStatus { behavior_id: b.id.clone(), status: next });
                }
            }
        }
        Ok(events)
    }

    /// All executable behaviors in (protocol config order, definition order).
    pub fn executable_set(&self) -> Vec<(String, String)> {
        self.protocols
            .iter()
            .flat_map(|p| {
                p.behaviors
                    .iter()
                    .filter(|b| b.status == BehaviorStatus::Executable)
                    .map(move |b| (p.id.clone(), b.id.clone()))
            })
            .collect()
    }

    /// Whether starting this behavior consumes the pending intent.
    pub fn consumes_intent(&self, behavior: &Behavior) -> bool {
        behavior
            .preconditions
            .iter()
            .any(|p| self.intent_sensors.contains(&p.sensor))
    }

    /// Starts the selected behavior and dispatches its action.
    ///
    /// Switching to a different protocol suspends the active one. If the
    /// behavior is guarded on the intent sensor, the pending intent is
    /// consumed: parked slot values are committed to their plain keys and the
    /// intent plus parked slots are cleared. Parameters are resolved after
    /// that commit. On error nothing is modified.
    pub fn begin_execution(&mut self, sel: &Selection, world: &mut WorldState) -> Result<Vec<EngineEvent>, GuidanceError> {
        if self.executing.is_some() {
            return Err(GuidanceError::ExecutorBusy);
        }
        let pi = self.protocol_index(&sel.protocol_id)?;
        let bi = self.protocols[pi]
            .behaviors
            .iter()
            .position(|b| b.id == sel.behavior_id)
            .ok_or_else(|| GuidanceError::UnknownBehavior(sel.behavior_id.clone()))?;
        let behavior = &self.protocols[pi].behaviors[bi];
        if behavior.status != BehaviorStatus::Executable {
            return Err(GuidanceError::StaleSelection(sel.behavior_id.clone()));
        }

        let mut next_world = world.clone();
        if self.consumes_intent(behavior) {
            consume_intent(&mut next_world);
        }
        let action = resolve_action_params(behavior, &next_world)?;
        *world = next_world;

        let mut events = Vec::new();
        if self.protocols[pi].status != ProtocolStatus::Active {
            if let Some(ai) = self.protocols.iter().position(|p| p.status == ProtocolStatus::Active) {
                let active = &mut self.protocols[ai];
                active.status = ProtocolStatus::Suspended;
                self.suspended_stack.push(active.id.clone());
                events.push(EngineEvent::ProtocolStatus {
                    protocol_id: active.id.clone(),
                    status: ProtocolStatus::Suspended,
                });
            }
            let ip = &mut self.protocols[pi];
            self.suspended_stack.retain(|id| id != &ip.id);
            ip.status = ProtocolStatus::Active;
            events.push(EngineEvent::ProtocolStatus { protocol_id: ip.id.clone(), status: ProtocolStatus::Active });
        }

        let b = &mut self.protocols[pi].behaviors[bi];
        b.status = BehaviorStatus::Executing;
        events.push(EngineEvent::BehaviorStatus { behavior_id: b.id.clone(), status: BehaviorStatus::Executing });
        self.executing = Some((sel.protocol_id.clone(), sel.behavior_id.clone()));
        events.push(EngineEvent::ActionDispatched { behavior_id: sel.behavior_id.clone(), action });
        Ok(events)
    }

    /// Marks the executing behavior finished. Completing an exit behavior
    /// completes its protocol, resets it to inactive and resumes the most
    /// recently suspended protocol, if any.
    pub fn complete_execution(&mut self, behavior_id: &str) -> Result<Vec<EngineEvent>, GuidanceError> {
        let Some((pid, bid)) = self.executing.clone() else {
            return Err(GuidanceError::NotExecuting(behavior_id.to_string()));
        };
        if bid != behavior_id {
            return Err(GuidanceError::NotExecuting(behavior_id.to_string()));
        }
        let pi = self.protocol_index(&pid)?;
        self.executing = None;

        let mut events = Vec::new();
        let ip = &mut self.protocols[pi];
        let b = ip
            .behaviors
            .iter_mut()
            .find(|b| b.id == bid)
            .ok_or_else(|| GuidanceError::UnknownBehavior(bid.clone()))?;
        b.status = BehaviorStatus::Finished;
        let is_exit = b.is_exit;
        events.push(EngineEvent::BehaviorStatus { behavior_id: bid.clone(), status: BehaviorStatus::Finished });
        ip.last_finished = Some(bid);

        if is_exit {
            ip.status = ProtocolStatus::Completed;
            events.push(EngineEvent::ProtocolStatus { protocol_id: ip.id.clone(), status: ProtocolStatus::Completed });
            for b in &mut ip.behaviors {
                if b.status != BehaviorStatus::Idle {
                    b.status = BehaviorStatus::Idle;
                    events.push(EngineEvent::BehaviorStatus { behavior_id: b.id.clone(), status: BehaviorStatus::Idle });
                }
                for (index, pre) in b.preconditions.iter_mut().enumerate() {
                    if pre.status != PreconditionStatus::Unknown {
                        pre.status = PreconditionStatus::Unknown;
                        events.push(EngineEvent::PreconditionChanged {
                            behavior_id: b.id.clone(),
                            index,
                            status: PreconditionStatus::Unknown,
                        });
                    }
                }
            }
            ip.last_finished = None;
            ip.status = ProtocolStatus::Inactive;
            events.push(EngineEvent::ProtocolStatus { protocol_id: ip.id.clone(), status: ProtocolStatus::Inactive });

            if let Some(resume) = self.suspended_stack.pop() {
                let ri = self.protocol_index(&resume)?;
                self.protocols[ri].status = ProtocolStatus::Active;
                events.push(EngineEvent::ProtocolStatus { protocol_id: resume, status: ProtocolStatus::Active });
            }
        }
        Ok(events)
    }

    pub fn snapshot(&self) -> EngineSnapshot {
        EngineSnapshot::of(self)
    }
}

/// Commits parked slot values to their plain keys, then clears the intent
/// and the parked entries.
pub fn consume_intent(world: &mut WorldState) {
    let pending: Vec<(String, String)> = world
        .present_keys()
        .filter_map(|k| k.strip_prefix(PENDING_SLOT_PREFIX).map(|slot| (k.to_string(), slot.to_string())))
        .collect();
    let tick = world.current_tick();
    let commits: Vec<_> = pending
        .iter()
        .map(|(k, slot)| crate::perception::Percept { key: slot.clone(), value: world.get(k).clone() })
        .collect();
    world.apply_percepts(&commits, tick);
    let mut cleared: Vec<String> = pending.into_iter().map(|(k, _)| k).collect();
    cleared.push(INTENT_KEY.to_string());
    world.clear_keys(&cleared);
}

/// Binds every action parameter: static values verbatim, dynamic ones from
/// the current world state.
pub fn resolve_action_params(behavior: &Behavior, world: &WorldState) -> Result<ConcreteAction, GuidanceError> {
    let mut params = std::collections::BTreeMap::new();
    for (name, binding) in &behavior.action.params {
        let value = match binding {
            ParamBinding::Static(v) => v.clone(),
            ParamBinding::FromWorld(key) => {
                let v = world.get(key);
                if v.is_none() {
                    return Err(GuidanceError::MissingWorldKey { key: key.clone() });
                }
                v.clone()
            }
        };
        params.insert(name.clone(), value);
    }
    Ok(ConcreteAction { name: behavior.action.name.clone(), params })
}

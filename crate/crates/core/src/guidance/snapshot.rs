use serde::{Deserialize, Serialize};

use super::{BehaviorStatus, EngineEvent, GuidanceEngine, PreconditionStatus, ProtocolStatus};

/// Observable engine state, rebuildable from an initial snapshot plus the
/// engine's event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSnapshot {
    pub protocols: Vec<ProtocolView>,
    pub executing: Option<(String, String)>,
    pub suspended_stack: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolView {
    pub id: String,
    pub status: ProtocolStatus,
    pub last_finished: Option<String>,
    pub behaviors: Vec<BehaviorView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorView {
    pub id: String,
    pub status: BehaviorStatus,
    pub preconditions: Vec<PreconditionStatus>,
}

impl EngineSnapshot {
    pub fn of(engine: &GuidanceEngine) -> Self {
        EngineSnapshot {
            protocols: engine
                .protocols
                .iter()
                .map(|p| ProtocolView {
                    id: p.id.clone(),
                    status: p.status,
                    last_finished: p.last_finished.clone(),
                    behaviors: p
                        .behaviors
                        .iter()
                        .map(|b| BehaviorView {
                            id: b.id.clone(),
                            status: b.status,
                            preconditions: b.preconditions.iter().map(|c| c.status).collect(),
                        })
                        .collect(),
                })
                .collect(),
            executing: engine.executing.clone(),
            suspended_stack: engine.suspended_stack.clone(),
        }
    }

    fn locate(&mut self, behavior_id: &str) -> Option<(usize, usize)> {
        self.protocols.iter().enumerate().find_map(|(pi, p)| {
            p.behaviors.iter().position(|b| b.id == behavior_id).map(|bi| (pi, bi))
        })
    }

    /// Applies one event. Unknown ids are ignored.
    pub fn apply(&mut self, event: &EngineEvent) {
        match event {
            EngineEvent::PreconditionChanged { behavior_id, index, status } => {
                if let Some((pi, bi)) = self.locate(behavior_id) {
                    if let Some(slot) = self.protocols[pi].behaviors[bi].preconditions.get_mut(*index) {
                        *slot = *status;
                    }
                }
            }
            EngineEvent::BehaviorStatus { behavior_id, status } => {
                if let Some((pi, bi)) = self.locate(behavior_id) {
                    let ip = &mut self.protocols[pi];
                    let previous = std::mem::replace(&mut ip.behaviors[bi].status, *status);
                    match status {
                        BehaviorStatus::Executing => {
                            self.executing = Some((ip.id.clone(), behavior_id.clone()));
                        }
                        BehaviorStatus::Finished => {
                            ip.last_finished = Some(behavior_id.clone());
                        }
                        _ => {}
                    }
                    if previous == BehaviorStatus::Executing && *status != BehaviorStatus::Executing {
                        self.executing = None;
                    }
                }
            }
            EngineEvent::ProtocolStatus { protocol_id, status } => {
                if let Some(ip) = self.protocols.iter_mut().find(|p| &p.id == protocol_id) {
                    ip.status = *status;
                    match status {
                        ProtocolStatus::Suspended => self.suspended_stack.push(protocol_id.clone()),
                        ProtocolStatus::Active => self.suspended_stack.retain(|id| id != protocol_id),
                        ProtocolStatus::Inactive => ip.last_finished = None,
                        ProtocolStatus::Completed => {}
                    }
                }
            }
            EngineEvent::ActionDispatched { .. } => {}
        }
    }

    pub fn apply_all<'a>(&mut self, events: impl IntoIterator<Item = &'a EngineEvent>) {
        for e in events {
            self.apply(e);
        }
    }
}

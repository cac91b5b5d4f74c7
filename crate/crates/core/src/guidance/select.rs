use super::{BehaviorStatus, GuidanceEngine, InteractionProtocol, ProtocolStatus, Selection};

impl GuidanceEngine {
    /// Chooses the next behavior to run, or `None` if nothing is executable.
    ///
    /// The active protocol keeps the floor unless a candidate protocol has a
    /// strictly higher priority. Among the rest, highest priority wins, then
    /// suspended over inactive, then config order. Inside the chosen protocol
    /// an inactive one can only start at its entry; otherwise successors of
    /// the last finished behavior go first, then definition order.
    pub fn select_next(&self) -> Option<Selection> {
        let candidates: Vec<&InteractionProtocol> =
            self.protocols.iter().filter(|p| p.has_executable()).collect();
        let active = candidates.iter().copied().find(|p| p.status == ProtocolStatus::Active);

        let chosen = match active {
            Some(a) if candidates.iter().all(|p| p.priority <= a.priority) => a,
            _ => candidates
                .iter()
                .copied()
                .enumerate()
                .max_by_key(|(order, p)| {
                    (
                        p.priority,
                        p.status == ProtocolStatus::Suspended,
                        std::cmp::Reverse(*order),
                    )
                })
                .map(|(_, p)| p)?,
        };

        let executable = || chosen.behaviors.iter().filter(|b| b.status == BehaviorStatus::Executable);
        let behavior = if chosen.status == ProtocolStatus::Inactive {
            executable().find(|b| b.is_entry)?
        } else {
            let after_last = chosen.last_finished.as_ref().and_then(|last| {
                executable()
                    .filter(|b| b.predecessors.contains(last))
                    .min_by_key(|b| b.def_index)
            });
            match after_last {
                Some(b) => b,
                None => executable().min_by_key(|b| b.def_index)?,
            }
        };

        Some(Selection { protocol_id: chosen.id.clone(), behavior_id: behavior.id.clone() })
    }
}

//! Percept memory and semantic sensor extraction.
//!
//! Raw percepts land in a [`WorldState`] keyed by string. Semantic sensors are
//! declarative extractors over that store; a [`SensorSnapshot`] is the value of
//! every declared sensor at one tick and is what preconditions are checked
//! against.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::value::SensorValue;

#[derive(Debug, Clone, PartialEq)]
pub struct Percept {
    pub key: String,
    pub value: SensorValue,
}

impl Percept {
    pub fn new(key: impl Into<String>, value: impl Into<SensorValue>) -> Self {
        Percept { key: key.into(), value: value.into() }
    }
}

/// Latest-value store. A key that was never written, or was cleared, reads as
/// [`SensorValue::None`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorldState {
    entries: BTreeMap<String, (SensorValue, u64)>,
    tick: u64,
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> &SensorValue {
        static NONE: SensorValue = SensorValue::None;
        self.entries.get(key).map(|(v, _)| v).unwrap_or(&NONE)
    }

    pub fn tick_of(&self, key: &str) -> Option<u64> {
        self.entries.get(key).map(|(_, t)| *t)
    }

    pub fn current_tick(&self) -> u64 {
        self.tick
    }

    /// Keys holding a value other than none, in key order.
    pub fn present_keys(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|(_, (v, _))| !v.is_none())
            .map(|(k, _)| k.as_str())
    }

    /// Writes every percept at `tick` and returns the keys whose value changed,
    /// in percept order. A key written twice in one batch is reported once.
    pub fn apply_percepts(&mut self, percepts: &[Percept], tick: u64) -> Vec<String> {
        debug_assert!(tick >= self.tick, "world state ticks must not go backwards");
        self.tick = self.tick.max(tick);
        let mut changed: Vec<String> = Vec::new();
        for p in percepts {
            debug_assert!(!p.key.is_empty());
            let differs = self.get(&p.key) != &p.value;
            self.entries.insert(p.key.clone(), (p.value.clone(), tick));
            if differs && !changed.contains(&p.key) {
                changed.push(p.key.clone());
            }
        }
        changed
    }

    /// Sets each listed key to none at the current tick. Absent keys are left absent.
    pub fn clear_keys<S: AsRef<str>>(&mut self, keys: &[S]) {
        let tick = self.tick;
        for key in keys {
            if let Some(entry) = self.entries.get_mut(key.as_ref()) {
                *entry = (SensorValue::None, tick);
            }
        }
    }

    pub fn extract_sensors(&self, defs: &[SemanticSensorDef]) -> SensorSnapshot {
        let values = defs
            .iter()
            .map(|d| (d.id.clone(), d.extractor.extract(self)))
            .collect();
        SensorSnapshot { values, tick: self.tick }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateOp {
    Eq,
    Ne,
    Le,
    Ge,
}

impl PredicateOp {
    pub fn as_str(self) -> &'static str {
        match self {
            PredicateOp::Eq => "eq",
            PredicateOp::Ne => "ne",
            PredicateOp::Le => "le",
            PredicateOp::Ge => "ge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eq" => Some(PredicateOp::Eq),
            "ne" => Some(PredicateOp::Ne),
            "le" => Some(PredicateOp::Le),
            "ge" => Some(PredicateOp::Ge),
            _ => None,
        }
    }

    /// Ordering comparisons only hold between two numbers.
    pub fn holds(self, lhs: &SensorValue, rhs: &SensorValue) -> bool {
        match self {
            PredicateOp::Eq => lhs == rhs,
            PredicateOp::Ne => lhs != rhs,
            PredicateOp::Le | PredicateOp::Ge => match (lhs.as_number(), rhs.as_number()) {
                (Some(a), Some(b)) if self == PredicateOp::Le => a <= b,
                (Some(a), Some(b)) => a >= b,
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extractor {
    Copy { key: String },
    Predicate { key: String, op: PredicateOp, value: SensorValue },
    Count { prefix: String },
}

impl Extractor {
    pub fn extract(&self, ws: &WorldState) -> SensorValue {
        match self {
            Extractor::Copy { key } => ws.get(key).clone(),
            Extractor::Predicate { key, op, value } => {
                let current = ws.get(key);
                SensorValue::Bool(!current.is_none() && op.holds(current, value))
            }
            Extractor::Count { prefix } => {
                SensorValue::Number(ws.present_keys().filter(|k| k.starts_with(prefix.as_str())).count() as f64)
            }
        }
    }

    /// World key (or key prefix, for counts) the extractor reads.
    pub fn key(&self) -> &str {
        match self {
            Extractor::Copy { key } | Extractor::Predicate { key, .. } => key,
            Extractor::Count { prefix } => prefix,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticSensorDef {
    pub id: String,
    pub name: String,
    pub icon: String,
    pub extractor: Extractor,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SensorSnapshot {
    pub values: BTreeMap<String, SensorValue>,
    pub tick: u64,
}

impl SensorSnapshot {
    pub fn get(&self, sensor: &str) -> Option<&SensorValue> {
        self.values.get(sensor)
    }

    pub fn with(mut self, sensor: &str, value: impl Into<SensorValue>) -> Self {
        self.values.insert(sensor.to_string(), value.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sensor(id: &str, extractor: Extractor) -> SemanticSensorDef {
        SemanticSensorDef { id: id.into(), name: id.into(), icon: "i".into(), extractor }
    }

    #[test]
    fn apply_reports_changed_keys() {
        let mut ws = WorldState::new();
        let changed = ws.apply_percepts(&[Percept::new("person_visible", true)], 0);
        assert_eq!(changed, vec!["person_visible"]);
        let changed = ws.apply_percepts(&[Percept::new("person_visible", true)], 1);
        assert!(changed.is_empty());
        assert_eq!(ws.tick_of("person_visible"), Some(1));
    }

    #[test]
    fn apply_sequence_changes() {
        let mut ws = WorldState::new();
        ws.apply_percepts(&[Percept::new("a", 1.0)], 0);
        let changed = ws.apply_percepts(&[Percept::new("a", 2.0), Percept::new("b", 3.0)], 1);
        assert_eq!(changed, vec!["a", "b"]);
    }

    #[test]
    fn predicate_on_distance() {
        let mut ws = WorldState::new();
        ws.apply_percepts(&[Percept::new("distance_to_avatar", 3.2)], 0);
        let defs = [sensor(
            "person_visible",
            Extractor::Predicate { key: "distance_to_avatar".into(), op: PredicateOp::Le, value: 5.0.into() },
        )];
        let snap = ws.extract_sensors(&defs);
        assert_eq!(snap.get("person_visible"), Some(&SensorValue::Bool(true)));
    }

    #[test]
    fn absent_keys() {
        let ws = WorldState::new();
        let defs = [
            sensor("last_intent", Extractor::Copy { key: "last_intent".into() }),
            sensor(
                "near",
                Extractor::Predicate { key: "distance_to_avatar".into(), op: PredicateOp::Ne, value: 1.0.into() },
            ),
        ];
        let snap = ws.extract_sensors(&defs);
        assert_eq!(snap.get("last_intent"), Some(&SensorValue::None));
        assert_eq!(snap.get("near"), Some(&SensorValue::Bool(false)));
    }

    #[test]
    fn count_prefix() {
        let mut ws = WorldState::new();
        ws.apply_percepts(
            &[
                Percept::new("region.kitchen", true),
                Percept::new("region.hall", true),
                Percept::new("regions_taught", 2.0),
            ],
            0,
        );
        let defs = [sensor("regions", Extractor::Count { prefix: "region.".into() })];
        assert_eq!(ws.extract_sensors(&defs).get("regions"), Some(&SensorValue::Number(2.0)));
    }

    #[test]
    fn clear_keys_semantics() {
        let mut ws = WorldState::new();
        ws.apply_percepts(&[Percept::new("last_intent", "arrived")], 4);
        ws.clear_keys(&["last_intent", "never_written"]);
        assert!(ws.get("last_intent").is_none());
        assert_eq!(ws.tick_of("never_written"), None);
        let changed = ws.apply_percepts(&[Percept::new("last_intent", "arrived")], 5);
        assert_eq!(changed, vec!["last_intent"]);
        assert_eq!(ws.get("last_intent"), &SensorValue::label("arrived"));
    }

    #[test]
    fn ordering_ops_need_numbers() {
        assert!(!PredicateOp::Le.holds(&"a".into(), &"b".into()));
        assert!(PredicateOp::Ge.holds(&5.0.into(), &5.0.into()));
        assert!(PredicateOp::Ne.holds(&true.into(), &"true".into()));
    }
}

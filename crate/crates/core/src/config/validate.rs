use std::collections::{BTreeMap, BTreeSet};

use super::{Config, ConfigError, ErrorCode};
use crate::guidance::{InteractionProtocol, ParamBinding};
use crate::nlu::{parse_utterance, pattern_slots};
use crate::perception::Extractor;
use crate::sim::{Point, AVATAR_RADIUS, ROBOT_CLEARANCE};
use crate::value::SensorValue;

/// Semantic checks over a typed config. Empty strings are treated as
/// already-reported placeholders and not flagged again as references.
pub fn validate(config: &Config) -> Vec<ConfigError> {
    let mut v = Validator { config, errors: Vec::new() };
    v.sensors();
    v.intents();
    v.actions();
    v.scenario();
    v.protocols();
    v.errors
}

struct Validator<'c> {
    config: &'c Config,
    errors: Vec<ConfigError>,
}

impl Validator<'_> {
    fn push(&mut self, path: String, code: ErrorCode, message: impl Into<String>) {
        self.errors.push(ConfigError::new(path, code, message));
    }

    fn unique<'a>(&mut self, ids: impl Iterator<Item = (String, &'a str)>, what: &str) {
        let mut seen = BTreeSet::new();
        for (path, id) in ids {
            if id.is_empty() {
                self.push(path, ErrorCode::BadValue, format!("{what} id must not be empty"));
            } else if !seen.insert(id) {
                self.push(path, ErrorCode::DuplicateId, format!("duplicate {what} id {id:?}"));
            }
        }
    }

    fn label_value(&mut self, path: String, value: &SensorValue) {
        if matches!(value, SensorValue::Label(s) if s.is_empty()) {
            self.push(path, ErrorCode::BadValue, "label values must not be empty");
        }
    }

    fn sensors(&mut self) {
        let sensors = &self.config.sensors;
        self.unique(sensors.iter().enumerate().map(|(i, s)| (format!("/sensors/{i}/id"), s.id.as_str())), "sensor");
        for (i, s) in sensors.iter().enumerate() {
            if s.icon.is_empty() {
                self.push(format!("/sensors/{i}/icon"), ErrorCode::BadValue, "icon must not be empty");
            }
            let key_path = format!("/sensors/{i}/extractor/key");
            match &s.extractor {
                Extractor::Count { prefix } => {
                    if prefix.is_empty() {
                        self.push(key_path, ErrorCode::BadValue, "count prefix must not be empty");
                    }
                }
                Extractor::Copy { key } | Extractor::Predicate { key, .. } => {
                    if !key.is_empty() && !self.config.is_known_world_key(key) {
                        self.push(key_path, ErrorCode::UnknownReference, format!("unknown world key {key:?}"));
                    }
                }
            }
            if let Extractor::Predicate { value, .. } = &s.extractor {
                self.label_value(format!("/sensors/{i}/extractor/value"), value);
            }
        }
    }

    fn intents(&mut self) {
        let intents = &self.config.intents;
        self.unique(intents.iter().enumerate().map(|(i, d)| (format!("/intents/{i}/name"), d.name.as_str())), "intent");
        for (i, intent) in intents.iter().enumerate() {
            if intent.patterns.is_empty() {
                self.push(format!("/intents/{i}/patterns"), ErrorCode::BadValue, "an intent needs at least one pattern");
            }
            let declared: BTreeSet<&str> = intent.slots.iter().map(String::as_str).collect();
            for (j, pattern) in intent.patterns.iter().enumerate() {
                let path = format!("/intents/{i}/patterns/{j}");
                if pattern.trim().is_empty() {
                    self.push(path, ErrorCode::BadValue, "pattern must not be empty");
                    continue;
                }
                let used: Vec<&str> = pattern_slots(pattern);
                for slot in &used {
                    if !declared.contains(slot) {
                        self.push(path.clone(), ErrorCode::UnknownReference, format!("undeclared slot {slot:?}"));
                    }
                }
                let used: BTreeSet<&str> = used.into_iter().collect();
                if used.len() != pattern_slots(pattern).len() {
                    self.push(path.clone(), ErrorCode::BadValue, "a slot may appear only once per pattern");
                }
                for slot in declared.difference(&used) {
                    self.push(path.clone(), ErrorCode::BadValue, format!("pattern does not capture slot {slot:?}"));
                }
            }
            if !intent.name.is_empty()
                && !intent.patterns.is_empty()
                && parse_utterance(&intent.example, intents).intent() != Some(intent.name.as_str())
            {
                self.push(
                    format!("/intents/{i}/example"),
                    ErrorCode::BadValue,
                    format!("example {:?} does not parse as {:?}", intent.example, intent.name),
                );
            }
        }
    }

    fn actions(&mut self) {
        let actions = &self.config.actions;
        self.unique(actions.iter().enumerate().map(|(i, a)| (format!("/actions/{i}/name"), a.name.as_str())), "action");
        for (i, a) in actions.iter().enumerate() {
            self.unique(
                a.params.iter().enumerate().map(|(j, p)| (format!("/actions/{i}/params/{j}"), p.as_str())),
                "parameter",
            );
        }
    }

    fn scenario(&mut self) {
        let s = &self.config.apartment;
        let apt = &s.apartment;
        if !(apt.width > 0.0 && apt.height > 0.0) {
            self.push("/apartment/bounds".into(), ErrorCode::BadValue, "bounds must be positive");
        }
        let bounds = apt.bounds();
        for (i, w) in apt.walls.iter().enumerate() {
            if !(w.w > 0.0 && w.h > 0.0) || !w.within(&bounds) {
                self.push(format!("/apartment/walls/{i}"), ErrorCode::BadValue, "wall must have positive size and lie within bounds");
            }
        }
        if apt.rooms.is_empty() {
            self.push("/apartment/rooms".into(), ErrorCode::BadValue, "at least one room (goal region) is required");
        }
        self.unique(apt.rooms.iter().enumerate().map(|(i, r)| (format!("/apartment/rooms/{i}/name"), r.name.as_str())), "room");
        for (i, r) in apt.rooms.iter().enumerate() {
            if !(r.rect.w > 0.0 && r.rect.h > 0.0) {
                self.push(format!("/apartment/rooms/{i}/rect"), ErrorCode::BadValue, "room must have positive size");
            }
        }
        let placement = |p: Point, radius: f64| apt.in_bounds(p) && !apt.hits_wall(p, radius);
        if !placement(s.robot_start, ROBOT_CLEARANCE) {
            self.push("/apartment/robot_start".into(), ErrorCode::BadValue, "robot start must be inside bounds and clear of walls");
        }
        if !placement(s.avatar_start, AVATAR_RADIUS) {
            self.push("/apartment/avatar_start".into(), ErrorCode::BadValue, "avatar start must be inside bounds and clear of walls");
        }
        for (key, value) in [
            ("perception_radius", s.perception_radius),
            ("speed", s.speed),
            ("tau", s.tau),
            ("time_limit_s", s.time_limit_s),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                self.push(format!("/apartment/{key}"), ErrorCode::BadValue, format!("{key} must be positive"));
            }
        }
    }

    fn protocols(&mut self) {
        let protocols = &self.config.protocols;
        self.unique(protocols.iter().enumerate().map(|(i, p)| (format!("/protocols/{i}/id"), p.id.as_str())), "protocol");
        // behavior ids are global: events refer to behaviors by id alone
        self.unique(
            protocols.iter().enumerate().flat_map(|(i, p)| {
                p.behaviors
                    .iter()
                    .enumerate()
                    .map(move |(j, b)| (format!("/protocols/{i}/behaviors/{j}/id"), b.id.as_str()))
            }),
            "behavior",
        );
        for (i, ip) in protocols.iter().enumerate() {
            self.protocol(i, ip);
        }
    }

    fn protocol(&mut self, i: usize, ip: &InteractionProtocol) {
        let base = format!("/protocols/{i}");
        let entries = ip.behaviors.iter().filter(|b| b.is_entry).count();
        match entries {
            0 => self.push(format!("{base}/behaviors"), ErrorCode::NoEntry, format!("protocol {:?} has no entry behavior", ip.id)),
            1 => {}
            n => self.push(
                format!("{base}/behaviors"),
                ErrorCode::MultipleEntries,
                format!("protocol {:?} has {n} entry behaviors", ip.id),
            ),
        }
        if !ip.behaviors.iter().any(|b| b.is_exit) {
            self.push(format!("{base}/behaviors"), ErrorCode::NoExit, format!("protocol {:?} has no exit behavior", ip.id));
        }

        let local: BTreeSet<&str> = ip.behaviors.iter().map(|b| b.id.as_str()).collect();
        for (j, b) in ip.behaviors.iter().enumerate() {
            let bp = format!("{base}/behaviors/{j}");
            for (k, pred) in b.predecessors.iter().enumerate() {
                if !local.contains(pred.as_str()) {
                    self.push(
                        format!("{bp}/predecessors/{k}"),
                        ErrorCode::UnknownReference,
                        format!("predecessor {pred:?} is not a behavior of protocol {:?}", ip.id),
                    );
                }
            }
            for (k, pre) in b.preconditions.iter().enumerate() {
                if !pre.sensor.is_empty() && !self.config.sensors.iter().any(|s| s.id == pre.sensor) {
                    self.push(
                        format!("{bp}/preconditions/{k}/sensor"),
                        ErrorCode::UnknownReference,
                        format!("unknown sensor {:?}", pre.sensor),
                    );
                }
                self.label_value(format!("{bp}/preconditions/{k}/value"), &pre.expected);
            }
            self.action(&bp, b);
        }

        for j in cycle_members(ip) {
            self.push(
                format!("{base}/behaviors/{j}/predecessors"),
                ErrorCode::PredecessorCycle,
                format!("behavior {:?} is part of a predecessor cycle", ip.behaviors[j].id),
            );
        }
    }

    fn action(&mut self, bp: &str, b: &crate::guidance::Behavior) {
        let action = &b.action;
        if action.name.is_empty() {
            return;
        }
        let Some(def) = self.config.action(&action.name) else {
            self.push(format!("{bp}/action/name"), ErrorCode::UnknownReference, format!("unknown action {:?}", action.name));
            return;
        };
        for required in &def.params {
            if !action.params.contains_key(required) {
                self.push(format!("{bp}/action/params"), ErrorCode::BadValue, format!("missing parameter {required:?}"));
            }
        }
        for (name, binding) in &action.params {
            let pp = format!("{bp}/action/params/{name}");
            if !def.params.contains(name) {
                self.push(pp.clone(), ErrorCode::BadValue, format!("action {:?} takes no parameter {name:?}", def.name));
            }
            match binding {
                ParamBinding::FromWorld(key) if !key.is_empty() && !self.config.is_known_world_key(key) => {
                    self.push(format!("{pp}/from_world"), ErrorCode::UnknownReference, format!("unknown world key {key:?}"));
                }
                ParamBinding::Static(value) => self.label_value(format!("{pp}/static"), value),
                _ => {}
            }
        }
    }
}

/// Indices of behaviors lying on a predecessor cycle, by iterative DFS with
/// white/grey/black colouring. Each cycle is reported once, at the behavior
/// that closes it.
fn cycle_members(ip: &InteractionProtocol) -> Vec<usize> {
    let index: BTreeMap<&str, usize> = ip.behaviors.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let edges: Vec<Vec<usize>> = ip
        .behaviors
        .iter()
        .map(|b| b.predecessors.iter().filter_map(|p| index.get(p.as_str()).copied()).collect())
        .collect();

    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let mut colour = vec![Colour::White; edges.len()];
    let mut found = BTreeSet::new();
    for root in 0..edges.len() {
        if colour[root] != Colour::White {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = Colour::Grey;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&succ) = edges[node].get(*next) {
                *next += 1;
                match colour[succ] {
                    Colour::White => {
                        colour[succ] = Colour::Grey;
                        stack.push((succ, 0));
                    }
                    Colour::Grey => {
                        found.insert(node);
                    }
                    Colour::Black => {}
                }
            } else {
                colour[node] = Colour::Black;
                stack.pop();
            }
        }
    }
    found.into_iter().collect()
}

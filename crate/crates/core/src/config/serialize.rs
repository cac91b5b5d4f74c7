use serde_json::{json, Map, Value};

use super::Config;
use crate::guidance::{Behavior, InteractionProtocol, ParamBinding};
use crate::perception::Extractor;
use crate::sim::Rect;

/// Canonical text form: keys in schema order, arrays in config order,
/// two-space indentation, trailing newline.
pub fn serialize(config: &Config) -> String {
    let mut out = serde_json::to_string_pretty(&to_json(config)).expect("config values are serializable");
    out.push('\n');
    out
}

fn rect(r: &Rect) -> Value {
    json!([r.x, r.y, r.w, r.h])
}

pub fn to_json(config: &Config) -> Value {
    let s = &config.apartment;
    json!({
        "version": config.version,
        "sensors": config.sensors.iter().map(|s| {
            let mut ex = Map::new();
            match &s.extractor {
                Extractor::Copy { key } => {
                    ex.insert("kind".into(), "copy".into());
                    ex.insert("key".into(), key.as_str().into());
                }
                Extractor::Predicate { key, op, value } => {
                    ex.insert("kind".into(), "predicate".into());
                    ex.insert("key".into(), key.as_str().into());
                    ex.insert("op".into(), op.as_str().into());
                    ex.insert("value".into(), value.to_json());
                }
                Extractor::Count { prefix } => {
                    ex.insert("kind".into(), "count".into());
                    ex.insert("key".into(), prefix.as_str().into());
                }
            }
            json!({ "id": s.id, "name": s.name, "icon": s.icon, "extractor": ex })
        }).collect::<Vec<_>>(),
        "intents": config.intents.iter().map(|i| json!({
            "name": i.name,
            "patterns": i.patterns,
            "slots": i.slots,
            "example": i.example,
        })).collect::<Vec<_>>(),
        "actions": config.actions.iter().map(|a| json!({ "name": a.name, "params": a.params })).collect::<Vec<_>>(),
        "apartment": {
            "bounds": [s.apartment.width, s.apartment.height],
            "walls": s.apartment.walls.iter().map(rect).collect::<Vec<_>>(),
            "rooms": s.apartment.rooms.iter().map(|r| json!({ "name": r.name, "rect": rect(&r.rect) })).collect::<Vec<_>>(),
            "robot_start": [s.robot_start.x, s.robot_start.y],
            "avatar_start": [s.avatar_start.x, s.avatar_start.y],
            "perception_radius": s.perception_radius,
            "speed": s.speed,
            "tau": s.tau,
            "time_limit_s": s.time_limit_s,
        },
        "protocols": config.protocols.iter().map(protocol_json).collect::<Vec<_>>(),
    })
}

fn protocol_json(ip: &InteractionProtocol) -> Value {
    json!({
        "id": ip.id,
        "name": ip.name,
        "priority": ip.priority,
        "behaviors": ip.behaviors.iter().map(behavior_json).collect::<Vec<_>>(),
    })
}

pub(crate) fn behavior_json(b: &Behavior) -> Value {
    let params: Map<String, Value> = b
        .action
        .params
        .iter()
        .map(|(name, binding)| {
            let v = match binding {
                ParamBinding::Static(v) => json!({ "static": v.to_json() }),
                ParamBinding::FromWorld(k) => json!({ "from_world": k }),
            };
            (name.clone(), v)
        })
        .collect();
    json!({
        "id": b.id,
        "title": b.title,
        "entry": b.is_entry,
        "exit": b.is_exit,
        "predecessors": b.predecessors,
        "preconditions": b.preconditions.iter().map(|p| json!({
            "sensor": p.sensor,
            "op": p.op.as_str(),
            "value": p.expected.to_json(),
        })).collect::<Vec<_>>(),
        "action": { "name": b.action.name, "params": params },
    })
}

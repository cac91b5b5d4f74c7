//! Independent reference implementations and input generators shared by the
//! property suite and the acceptance runner.

#![allow(dead_code)]

use std::cmp::Reverse;

use familiar_core::config::BUILTIN_WORLD_KEYS;
use familiar_core::guidance::{
    ActionSpec, Behavior, BehaviorStatus, InteractionProtocol, ProtocolStatus,
};
use familiar_core::session::{ClientMessage, ScriptEntry};
use familiar_core::sim::{Point, Sample};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Selection

/// Brute force over every executable (protocol, behavior) pair, ranked by a
/// single lexicographic key written straight from the rule text:
///
/// 1. the active protocol stays chosen unless some other protocol with an
///    executable behavior has strictly higher priority;
/// 2. otherwise higher priority, then suspended before inactive, then
///    earlier in config order;
/// 3. an inactive protocol may only start at its entry behavior;
/// 4. inside a protocol, successors of the last finished behavior first,
///    then lower definition index.
pub fn oracle_select(ips: &[InteractionProtocol]) -> Option<(String, String)> {
    let has_exec = |p: &InteractionProtocol| p.behaviors.iter().any(|b| b.status == BehaviorStatus::Executable);
    let keeps_floor = |i: usize| {
        let p = &ips[i];
        p.status == ProtocolStatus::Active
            && has_exec(p)
            && ips.iter().enumerate().all(|(j, q)| j == i || !has_exec(q) || q.priority <= p.priority)
    };
    type Rank = (bool, u32, bool, Reverse<usize>, bool, Reverse<usize>);
    let mut best: Option<(Rank, (String, String))> = None;
    for (i, p) in ips.iter().enumerate() {
        for (j, b) in p.behaviors.iter().enumerate() {
            if b.status != BehaviorStatus::Executable {
                continue;
            }
            if p.status == ProtocolStatus::Inactive && !b.is_entry {
                continue;
            }
            let after_last = p.last_finished.as_ref().is_some_and(|l| b.predecessors.contains(l));
            let key = (
                keeps_floor(i),
                p.priority,
                p.status == ProtocolStatus::Suspended,
                Reverse(i),
                after_last,
                Reverse(j),
            );
            if best.as_ref().is_none_or(|(k, _)| key > *k) {
                best = Some((key, (p.id.clone(), b.id.clone())));
            }
        }
    }
    best.map(|(_, sel)| sel)
}

fn say() -> ActionSpec {
    ActionSpec::new("say").with_static("text", "hi")
}

const TOPOLOGIES_2: &[&[&[usize]]] = &[&[&[], &[]], &[&[], &[0]]];
const TOPOLOGIES_3: &[&[&[usize]]] = &[
    &[&[], &[], &[]],
    &[&[], &[0], &[]],
    &[&[], &[], &[0]],
    &[&[], &[], &[1]],
    &[&[], &[0], &[0]],
    &[&[], &[0], &[1]],
    &[&[], &[], &[0, 1]],
    &[&[], &[0], &[0, 1]],
];

fn build_ip(prefix: &str, priority: u32, status: ProtocolStatus, preds: &[&[usize]], statuses: &[BehaviorStatus], last: Option<usize>) -> InteractionProtocol {
    let n = preds.len();
    let behaviors = (0..n)
        .map(|j| {
            let mut b = Behavior::new(format!("{prefix}b{j}"), say());
            b.is_entry = j == 0;
            b.is_exit = j == n - 1;
            b.predecessors = preds[j].iter().map(|k| format!("{prefix}b{k}")).collect();
            b.status = statuses[j];
            b
        })
        .collect();
    let mut ip = InteractionProtocol::new(format!("{prefix}ip"), priority, behaviors);
    ip.status = status;
    ip.last_finished = last.map(|k| format!("{prefix}b{k}"));
    ip
}

/// Every reachable state of one protocol with `n` behaviors under each of
/// the given predecessor topologies. Inactive protocols only ever have an
/// evaluated entry behavior and no history.
pub fn protocol_variants(prefix: &str, max_behaviors: usize, priorities: &[u32]) -> Vec<InteractionProtocol> {
    use BehaviorStatus::*;
    let mut out = Vec::new();
    const SINGLE: &[&[usize]] = &[&[]];
    let topologies: Vec<&[&[usize]]> = std::iter::once(SINGLE)
        .chain(TOPOLOGIES_2.iter().copied().filter(|_| max_behaviors >= 2))
        .chain(TOPOLOGIES_3.iter().copied().filter(|_| max_behaviors >= 3))
        .collect();
    for preds in topologies {
        let n = preds.len();
        for &priority in priorities {
            for first in [Idle, Executable] {
                let mut statuses = vec![Idle; n];
                statuses[0] = first;
                out.push(build_ip(prefix, priority, ProtocolStatus::Inactive, preds, &statuses, None));
            }
            for status in [ProtocolStatus::Active, ProtocolStatus::Suspended] {
                for code in 0..3usize.pow(n as u32) {
                    let statuses: Vec<BehaviorStatus> =
                        (0..n).map(|j| [Idle, Executable, Finished][(code / 3usize.pow(j as u32)) % 3]).collect();
                    let finished: Vec<usize> = (0..n).filter(|&j| statuses[j] == Finished).collect();
                    for last in std::iter::once(None).chain(finished.into_iter().map(Some)) {
                        out.push(build_ip(prefix, priority, status, preds, &statuses, last));
                    }
                }
            }
        }
    }
    out
}

fn at_most_one_active(ips: &[InteractionProtocol]) -> bool {
    ips.iter().filter(|p| p.status == ProtocolStatus::Active).count() <= 1
}

/// Exhaustive engines: one protocol with up to three behaviors, and every
/// pair of protocols with up to two behaviors each.
pub fn exhaustive_selection_cases() -> Vec<Vec<InteractionProtocol>> {
    let mut cases = Vec::new();
    for ip in protocol_variants("p0", 3, &[0, 1, 2]) {
        cases.push(vec![ip]);
    }
    let a = protocol_variants("p0", 2, &[0, 1, 2]);
    let b = protocol_variants("p1", 2, &[0, 1, 2]);
    for x in &a {
        for y in &b {
            let case = vec![x.clone(), y.clone()];
            if at_most_one_active(&case) {
                cases.push(case);
            }
        }
    }
    cases
}

/// Seeded random engines with three protocols of up to three behaviors.
pub fn random_selection_cases(seed: u64, count: usize) -> Vec<Vec<InteractionProtocol>> {
    let variants: Vec<Vec<InteractionProtocol>> =
        (0..3).map(|i| protocol_variants(&format!("p{i}"), 3, &[0, 1, 2])).collect();
    let mut r = rng(seed);
    let mut cases = Vec::new();
    while cases.len() < count {
        let case: Vec<InteractionProtocol> = variants.iter().map(|v| v.choose(&mut r).unwrap().clone()).collect();
        if at_most_one_active(&case) {
            cases.push(case);
        }
    }
    cases
}

// ---------------------------------------------------------------------------
// Region learner

/// Linear scan: nearest sample by Euclidean distance, earliest sample on
/// ties, unclassified beyond `tau`.
pub fn brute_force_classify(samples: &[Sample], tau: f64, p: Point) -> Option<String> {
    let mut best: Option<(f64, &Sample)> = None;
    for s in samples {
        let d = ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt();
        match best {
            Some((bd, _)) if d >= bd => {}
            _ => best = Some((d, s)),
        }
    }
    best.filter(|(d, _)| *d <= tau).map(|(_, s)| s.label.clone())
}

// ---------------------------------------------------------------------------
// Config documents

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// A random but valid configuration document.
pub fn generate_config(r: &mut ChaCha8Rng) -> Value {
    let width = round2(r.gen_range(6.0..14.0));
    let height = round2(r.gen_range(5.0..10.0));

    let n_sensors = r.gen_range(2..=5);
    let mut sensors = Vec::new();
    let mut sensor_kinds = Vec::new();
    for i in 0..n_sensors {
        let (extractor, kind) = match r.gen_range(0..4) {
            0 => (json!({"kind": "copy", "key": BUILTIN_WORLD_KEYS.choose(r).unwrap()}), "any"),
            1 => {
                let op = *["eq", "ne", "le", "ge"].choose(r).unwrap();
                let value = round2(r.gen_range(0.0..8.0));
                (json!({"kind": "predicate", "key": "distance_to_avatar", "op": op, "value": value}), "bool")
            }
            2 => (json!({"kind": "predicate", "key": "battery_low", "op": "eq", "value": r.gen_bool(0.5)}), "bool"),
            _ => (json!({"kind": "count", "key": "region."}), "number"),
        };
        sensors.push(json!({"id": format!("s{i}"), "name": format!("Sensor {i}"), "icon": format!("icon{i}"), "extractor": extractor}));
        sensor_kinds.push(kind);
    }

    let n_intents = r.gen_range(1..=3);
    let mut intents = Vec::new();
    let mut slots = Vec::new();
    for i in 0..n_intents {
        if r.gen_bool(0.5) {
            let slot = format!("slot{i}");
            intents.push(json!({
                "name": format!("intent{i}"),
                "patterns": [format!("word{i} {{{slot}}}"), format!("say word{i} now {{{slot}}}")],
                "slots": [slot],
                "example": format!("word{i} thing"),
            }));
            slots.push(format!("slot{i}"));
        } else {
            intents.push(json!({
                "name": format!("intent{i}"),
                "patterns": [format!("plain{i}")],
                "slots": [],
                "example": format!("plain{i}"),
            }));
        }
    }

    let actions = json!([
        {"name": "say", "params": ["text"]},
        {"name": "follow", "params": ["target"]},
        {"name": "custom", "params": ["a", "b"]},
        {"name": "noop", "params": []}
    ]);
    let mut world_keys: Vec<String> = BUILTIN_WORLD_KEYS.iter().map(|s| s.to_string()).collect();
    world_keys.extend(slots.iter().cloned());

    let walls: Vec<Value> = (0..r.gen_range(0..=3))
        .map(|_| {
            let x = round2(r.gen_range(width / 2.0..width - 1.0));
            let y = round2(r.gen_range(0.0..height - 1.0));
            json!([x, y, round2(r.gen_range(0.1..1.0)), round2(r.gen_range(0.1..1.0))])
        })
        .collect();
    let rooms: Vec<Value> = (0..r.gen_range(1..=3))
        .map(|i| json!({"name": format!("room{i}"), "rect": [0.0, round2(i as f64), round2(width / 2.0), 1.0]}))
        .collect();

    let mut protocols = Vec::new();
    for p in 0..r.gen_range(0..=3) {
        let n = r.gen_range(1..=4);
        let mut behaviors = Vec::new();
        for j in 0..n {
            let id = format!("p{p}b{j}");
            let predecessors: Vec<String> = (0..j).filter(|_| r.gen_bool(0.4)).map(|k| format!("p{p}b{k}")).collect();
            let preconditions: Vec<Value> = (0..r.gen_range(0..=2))
                .map(|_| {
                    let s = r.gen_range(0..n_sensors);
                    let value = match sensor_kinds[s] {
                        "bool" => json!(r.gen_bool(0.5)),
                        "number" => json!(r.gen_range(0..4) as f64),
                        _ => json!(*["alpha", "beta", "gamma"].choose(r).unwrap()),
                    };
                    let op = *["eq", "ne"].choose(r).unwrap();
                    json!({"sensor": format!("s{s}"), "op": op, "value": value})
                })
                .collect();
            let bind = |r: &mut ChaCha8Rng| {
                if r.gen_bool(0.5) {
                    json!({"from_world": world_keys.choose(r).unwrap()})
                } else {
                    json!({"static": format!("text {}", r.gen_range(0..100))})
                }
            };
            let action = match r.gen_range(0..4) {
                0 => json!({"name": "say", "params": {"text": bind(r)}}),
                1 => json!({"name": "follow", "params": {"target": bind(r)}}),
                2 => json!({"name": "custom", "params": {"a": bind(r), "b": bind(r)}}),
                _ => json!({"name": "noop", "params": {}}),
            };
            behaviors.push(json!({
                "id": id,
                "title": format!("Behavior {p}.{j}"),
                "entry": j == 0,
                "exit": j == n - 1,
                "predecessors": predecessors,
                "preconditions": preconditions,
                "action": action,
            }));
        }
        protocols.push(json!({
            "id": format!("ip{p}"),
            "name": format!("Protocol {p}"),
            "priority": r.gen_range(0..10),
            "behaviors": behaviors,
        }));
    }

    json!({
        "version": 1,
        "sensors": sensors,
        "intents": intents,
        "actions": actions,
        "apartment": {
            "bounds": [width, height],
            "walls": walls,
            "rooms": rooms,
            "robot_start": [0.5, 0.5],
            "avatar_start": [1.5, 0.5],
            "perception_radius": round2(r.gen_range(1.0..8.0)),
            "speed": round2(r.gen_range(0.2..2.0)),
            "tau": round2(r.gen_range(0.5..5.0)),
            "time_limit_s": round2(r.gen_range(10.0..3600.0)),
        },
        "protocols": protocols,
    })
}

/// Independent defects, each touching a different part of the default
/// document so that no defect can mask another.
pub const DEFECTS: &[fn(&mut Value)] = &[
    |d| d["sensors"][1]["id"] = json!("person_visible"),
    |d| d["sensors"][2]["icon"] = json!(""),
    |d| d["sensors"][3]["extractor"]["kind"] = json!("magic"),
    |d| d["intents"][0]["patterns"][1] = json!("this is the {room}"),
    |d| d["intents"][2]["name"] = json!(7),
    |d| d["actions"][1]["params"] = json!(["goal", "goal"]),
    |d| d["apartment"]["perception_radius"] = json!(-1.0),
    |d| d["apartment"]["walls"][0] = json!([4.0, 0.0, "wide", 3.0]),
    |d| d["apartment"]["robot_start"] = json!([40.0, 1.0]),
    |d| d["protocols"][0]["behaviors"][1]["predecessors"][0] = json!("nowhere"),
    |d| d["protocols"][0]["behaviors"][2]["action"]["name"] = json!("dance"),
    |d| d["protocols"][0]["behaviors"][0]["preconditions"][0]["op"] = json!("lt"),
    |d| d["protocols"][1]["priority"] = json!(-3),
    |d| d["protocols"][1]["behaviors"][0]["exit"] = json!(false),
    |d| d["extra_key"] = json!(true),
];

/// Applies `k` distinct defects chosen at random.
pub fn seed_defects(doc: &mut Value, k: usize, r: &mut ChaCha8Rng) {
    let mut picks: Vec<usize> = (0..DEFECTS.len()).collect();
    picks.shuffle(r);
    for &i in &picks[..k] {
        DEFECTS[i](doc);
    }
}

// ---------------------------------------------------------------------------
// Session scripts

pub const UTTERANCES: &[&str] = &[
    "learn the region kitchen",
    "learn the region hall",
    "learn the region entrance",
    "this is the garage",
    "we arrived",
    "here we are",
    "hello",
    "stop",
    "what can you do",
    "blargh",
];

/// A random session script over the default scenario: chats, avatar moves
/// (some invalid), snapshot requests and the occasional reset.
pub fn random_script(r: &mut ChaCha8Rng, len: usize, max_gap: u64) -> Vec<ScriptEntry> {
    let mut tick = 0;
    let mut out = Vec::new();
    for _ in 0..len {
        tick += r.gen_range(0..=max_gap);
        let message = match r.gen_range(0..20) {
            0..=8 => ClientMessage::Chat { text: UTTERANCES.choose(r).unwrap().to_string() },
            9..=17 => ClientMessage::MoveAvatar { x: round2(r.gen_range(-0.5..10.5)), y: round2(r.gen_range(-0.5..8.5)) },
            18 => ClientMessage::GetSnapshot {},
            _ => ClientMessage::Reset {},
        };
        out.push(ScriptEntry { tick, message });
    }
    out
}

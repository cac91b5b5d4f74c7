use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{validate, ActionDef, Config, ConfigError, ErrorCode, ScenarioConfig, SCHEMA_VERSION};
use crate::guidance::{ActionSpec, Behavior, CompareOp, InteractionProtocol, ParamBinding, Precondition};
use crate::nlu::IntentDef;
use crate::perception::{Extractor, PredicateOp, SemanticSensorDef};
use crate::sim::{Apartment, Point, Rect, Room};
use crate::value::SensorValue;

/// Parses and validates a configuration document. All structural and
/// semantic problems are collected; a config is returned only if there are none.
pub fn parse_config(text: &str) -> Result<Config, Vec<ConfigError>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        vec![ConfigError::new(
            "/",
            ErrorCode::SyntaxError,
            format!("line {} column {}: {e}", e.line(), e.column()),
        )]
    })?;
    let mut walker = Walker::default();
    let config = walker.config(&doc);
    let mut errors = walker.errors;
    errors.extend(validate(&config));
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(errors)
    }
}

/// Parses a single behavior document as accepted by the editor path.
pub(crate) fn parse_behavior(doc: &Value, path: &str) -> Result<Behavior, Vec<ConfigError>> {
    let mut walker = Walker::default();
    let b = walker.behavior(doc, path, 0);
    if walker.errors.is_empty() {
        Ok(b)
    } else {
        Err(walker.errors)
    }
}

fn join(path: &str, key: impl std::fmt::Display) -> String {
    if path == "/" {
        format!("/{key}")
    } else {
        format!("{path}/{key}")
    }
}

/// Collects structural errors while building typed values. Missing or
/// ill-typed fields are replaced by neutral placeholders so that the
/// remaining document is still checked.
#[derive(Default)]
struct Walker {
    errors: Vec<ConfigError>,
}

impl Walker {
    fn bad(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(ConfigError::new(path, ErrorCode::BadValue, message));
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str, keys: &[&str]) -> Option<&'v Map<String, Value>> {
        let Some(obj) = v.as_object() else {
            self.bad(path, "expected an object");
            return None;
        };
        for k in obj.keys() {
            if !keys.contains(&k.as_str()) {
                self.bad(&join(path, k), format!("unknown key {k:?}"));
            }
        }
        Some(obj)
    }

    fn field<'v>(&mut self, obj: Option<&'v Map<String, Value>>, key: &str, path: &str) -> Option<&'v Value> {
        let obj = obj?;
        let v = obj.get(key);
        if v.is_none() {
            self.bad(&join(path, key), format!("missing required key {key:?}"));
        }
        v
    }

    fn string(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str) -> String {
        match self.field(obj, key, path) {
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                self.bad(&join(path, key), "expected a string");
                String::new()
            }
            None => String::new(),
        }
    }

    fn boolean(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str) -> bool {
        match self.field(obj, key, path) {
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                self.bad(&join(path, key), "expected a boolean");
                false
            }
            None => false,
        }
    }

    fn number_at(&mut self, v: Option<&Value>, path: &str) -> f64 {
        match v {
            Some(Value::Number(n)) => n.as_f64().unwrap_or(0.0),
            Some(_) => {
                self.bad(path, "expected a number");
                0.0
            }
            None => 0.0,
        }
    }

    fn number(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str) -> f64 {
        let v = self.field(obj, key, path);
        self.number_at(v, &join(path, key))
    }

    fn array<'v>(&mut self, obj: Option<&'v Map<String, Value>>, key: &str, path: &str) -> &'v [Value] {
        match self.field(obj, key, path) {
            Some(Value::Array(a)) => a,
            Some(_) => {
                self.bad(&join(path, key), "expected an array");
                &[]
            }
            None => &[],
        }
    }

    fn strings(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str) -> Vec<String> {
        let p = join(path, key);
        self.array(obj, key, path)
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::String(s) => s.clone(),
                _ => {
                    self.bad(&join(&p, i), "expected a string");
                    String::new()
                }
            })
            .collect()
    }

    fn numbers<const N: usize>(&mut self, v: Option<&Value>, path: &str) -> [f64; N] {
        let mut out = [0.0; N];
        match v {
            Some(Value::Array(a)) if a.len() == N => {
                for (i, x) in a.iter().enumerate() {
                    out[i] = self.number_at(Some(x), &join(path, i));
                }
            }
            Some(_) => self.bad(path, format!("expected an array of {N} numbers")),
            None => {}
        }
        out
    }

    fn scalar(&mut self, v: Option<&Value>, path: &str) -> SensorValue {
        match v {
            None => SensorValue::None,
            Some(v) => SensorValue::from_json(v).unwrap_or_else(|| {
                self.bad(path, "expected a boolean, number, string or null");
                SensorValue::None
            }),
        }
    }

    fn config(&mut self, doc: &Value) -> Config {
        let root = self.object(doc, "/", &["version", "sensors", "intents", "actions", "apartment", "protocols"]);
        let version = match self.field(root, "version", "/") {
            Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => SCHEMA_VERSION,
            Some(_) => {
                self.bad("/version", format!("version must be {SCHEMA_VERSION}"));
                SCHEMA_VERSION
            }
            None => SCHEMA_VERSION,
        };
        let sensors = self
            .array(root, "sensors", "/")
            .iter()
            .enumerate()
            .map(|(i, v)| self.sensor(v, &format!("/sensors/{i}")))
            .collect();
        let intents = self
            .array(root, "intents", "/")
            .iter()
            .enumerate()
            .map(|(i, v)| self.intent(v, &format!("/intents/{i}")))
            .collect();
        let actions = self
            .array(root, "actions", "/")
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let path = format!("/actions/{i}");
                let obj = self.object(v, &path, &["name", "params"]);
                ActionDef { name: self.string(obj, "name", &path), params: self.strings(obj, "params", &path) }
            })
            .collect();
        let apartment = match self.field(root, "apartment", "/") {
            Some(v) => self.scenario(v, "/apartment"),
            None => self.scenario(&Value::Object(Map::new()), "/apartment"),
        };
        let protocols = self
            .array(root, "protocols", "/")
            .iter()
            .enumerate()
            .map(|(i, v)| self.protocol(v, &format!("/protocols/{i}")))
            .collect();
        Config { version, sensors, intents, actions, apartment, protocols }
    }

    fn sensor(&mut self, v: &Value, path: &str) -> SemanticSensorDef {
        let obj = self.object(v, path, &["id", "name", "icon", "extractor"]);
        let id = self.string(obj, "id", path);
        let name = self.string(obj, "name", path);
        let icon = self.string(obj, "icon", path);
        let ex_path = join(path, "extractor");
        let extractor = match self.field(obj, "extractor", path) {
            Some(ev) => {
                let eobj = self.object(ev, &ex_path, &["kind", "key", "op", "value"]);
                let kind = self.string(eobj, "kind", &ex_path);
                let key = self.string(eobj, "key", &ex_path);
                match kind.as_str() {
                    "copy" => Extractor::Copy { key },
                    "count" => Extractor::Count { prefix: key },
                    "predicate" => {
                        let op_path = join(&ex_path, "op");
                        let op = match self.string(eobj, "op", &ex_path).as_str() {
                            "" => PredicateOp::Eq,
                            s => PredicateOp::parse(s).unwrap_or_else(|| {
                                self.bad(&op_path, format!("unknown comparison {s:?}"));
                                PredicateOp::Eq
                            }),
                        };
                        let value = self.field(eobj, "value", &ex_path);
                        let value = self.scalar(value, &join(&ex_path, "value"));
                        Extractor::Predicate { key, op, value }
                    }
                    other => {
                        if !other.is_empty() {
                            self.bad(&join(&ex_path, "kind"), format!("unknown extractor kind {other:?}"));
                        }
                        Extractor::Copy { key }
                    }
                }
            }
            None => Extractor::Copy { key: String::new() },
        };
        SemanticSensorDef { id, name, icon, extractor }
    }

    fn intent(&mut self, v: &Value, path: &str) -> IntentDef {
        let obj = self.object(v, path, &["name", "patterns", "slots", "example"]);
        IntentDef {
            name: self.string(obj, "name", path),
            patterns: self.strings(obj, "patterns", path),
            slots: self.strings(obj, "slots", path),
            example: self.string(obj, "example", path),
        }
    }

    fn scenario(&mut self, v: &Value, path: &str) -> ScenarioConfig {
        let obj = self.object(
            v,
            path,
            &[
                "bounds",
                "walls",
                "rooms",
                "robot_start",
                "avatar_start",
                "perception_radius",
                "speed",
                "tau",
                "time_limit_s",
            ],
        );
        let bounds = self.field(obj, "bounds", path);
        let [width, height] = self.numbers::<2>(bounds, &join(path, "bounds"));
        let walls_path = join(path, "walls");
        let walls = self
            .array(obj, "walls", path)
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let [x, y, w, h] = self.numbers::<4>(Some(w), &join(&walls_path, i));
                Rect::new(x, y, w, h)
            })
            .collect();
        let rooms_path = join(path, "rooms");
        let rooms = self
            .array(obj, "rooms", path)
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let rp = join(&rooms_path, i);
                let robj = self.object(r, &rp, &["name", "rect"]);
                let name = self.string(robj, "name", &rp);
                let rect = self.field(robj, "rect", &rp);
                let [x, y, w, h] = self.numbers::<4>(rect, &join(&rp, "rect"));
                Room { name, rect: Rect::new(x, y, w, h) }
            })
            .collect();
        let rs = self.field(obj, "robot_start", path);
        let [rx, ry] = self.numbers::<2>(rs, &join(path, "robot_start"));
        let avs = self.field(obj, "avatar_start", path);
        let [ax, ay] = self.numbers::<2>(avs, &join(path, "avatar_start"));
        ScenarioConfig {
            apartment: Apartment { width, height, walls, rooms },
            robot_start: Point::new(rx, ry),
            avatar_start: Point::new(ax, ay),
            perception_radius: self.number(obj, "perception_radius", path),
            speed: self.number(obj, "speed", path),
            tau: self.number(obj, "tau", path),
            time_limit_s: self.number(obj, "time_limit_s", path),
        }
    }

    fn protocol(&mut self, v: &Value, path: &str) -> InteractionProtocol {
        let obj = self.object(v, path, &["id", "name", "priority", "behaviors"]);
        let id = self.string(obj, "id", path);
        let name = self.string(obj, "name", path);
        let priority = match self.field(obj, "priority", path) {
            Some(Value::Number(n)) if n.as_u64().is_some_and(|p| p <= u32::MAX as u64) => n.as_u64().unwrap() as u32,
            Some(_) => {
                self.bad(&join(path, "priority"), "priority must be a non-negative integer");
                0
            }
            None => 0,
        };
        let bpath = join(path, "behaviors");
        let behaviors = self
            .array(obj, "behaviors", path)
            .iter()
            .enumerate()
            .map(|(i, b)| self.behavior(b, &join(&bpath, i), i))
            .collect();
        let mut ip = InteractionProtocol::new(id, priority, behaviors);
        ip.name = name;
        ip
    }

    fn behavior(&mut self, v: &Value, path: &str, index: usize) -> Behavior {
        let obj = self.object(
            v,
            path,
            &["id", "title", "entry", "exit", "predecessors", "preconditions", "action"],
        );
        let id = self.string(obj, "id", path);
        let title = self.string(obj, "title", path);
        let is_entry = self.boolean(obj, "entry", path);
        let is_exit = self.boolean(obj, "exit", path);
        let predecessors = self.strings(obj, "predecessors", path);
        let ppath = join(path, "preconditions");
        let preconditions = self
            .array(obj, "preconditions", path)
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let cp = join(&ppath, i);
                let cobj = self.object(p, &cp, &["sensor", "op", "value"]);
                let sensor = self.string(cobj, "sensor", &cp);
                let op = self.string(cobj, "op", &cp);
                let op = CompareOp::parse(&op).unwrap_or_else(|| {
                    if cobj.is_some_and(|o| o.contains_key("op")) {
                        self.bad(&join(&cp, "op"), format!("op must be \"eq\" or \"ne\", got {op:?}"));
                    }
                    CompareOp::Eq
                });
                let value = self.field(cobj, "value", &cp);
                let value = self.scalar(value, &join(&cp, "value"));
                Precondition::new(sensor, op, value)
            })
            .collect();
        let apath = join(path, "action");
        let action = match self.field(obj, "action", path) {
            Some(av) => {
                let aobj = self.object(av, &apath, &["name", "params"]);
                let name = self.string(aobj, "name", &apath);
                let params_path = join(&apath, "params");
                let mut params = BTreeMap::new();
                match self.field(aobj, "params", &apath) {
                    Some(Value::Object(map)) => {
                        for (param, binding) in map {
                            let bp = join(&params_path, param);
                            let bobj = self.object(binding, &bp, &["static", "from_world"]);
                            let binding = match bobj.map(|o| (o.get("static"), o.get("from_world"))) {
                                Some((Some(s), None)) => ParamBinding::Static(self.scalar(Some(s), &join(&bp, "static"))),
                                Some((None, Some(Value::String(k)))) => ParamBinding::FromWorld(k.clone()),
                                Some((None, Some(_))) => {
                                    self.bad(&join(&bp, "from_world"), "expected a world key string");
                                    ParamBinding::FromWorld(String::new())
                                }
                                Some(_) => {
                                    self.bad(&bp, "binding needs exactly one of \"static\" or \"from_world\"");
                                    ParamBinding::Static(SensorValue::None)
                                }
                                None => ParamBinding::Static(SensorValue::None),
                            };
                            params.insert(param.clone(), binding);
                        }
                    }
                    Some(_) => self.bad(&params_path, "expected an object"),
                    None => {}
                }
                ActionSpec { name, params }
            }
            None => ActionSpec::default(),
        };
        Behavior {
            id,
            title,
            is_entry,
            is_exit,
            preconditions,
            predecessors,
            action,
            status: crate::guidance::BehaviorStatus::Idle,
            def_index: index,
        }
    }
}

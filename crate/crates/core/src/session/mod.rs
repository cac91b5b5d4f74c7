//! One interactive run: simulation, world state, guidance engine and NLU
//! wired together behind a message interface, advanced in fixed 10 Hz ticks.
//!
//! A tick steps the simulation, writes percepts, re-extracts sensors,
//! re-evaluates preconditions, lets the engine dispatch one behavior if the
//! executor is free, retires completed actions and finally checks whether
//! the session is over. Client messages are handled between ticks.

mod log;
mod metrics;
mod replay;
mod wire;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::{parse_behavior, to_json, validate, Config, ConfigError, ErrorCode, REGION_KEY_PREFIX};
use crate::guidance::{
    EngineEvent, EngineSnapshot, GuidanceEngine, PreconditionStatus, ProtocolStatus, INTENT_KEY,
    PENDING_SLOT_PREFIX,
};
use crate::nlu::{parse_utterance, ParseResult};
use crate::perception::{Percept, SensorSnapshot, WorldState};
use crate::sim::{FloorGrid, MoveResult, Point, Pose, Sample, SimEvent, SimState};
use crate::value::SensorValue;

pub use log::{export_ndjson, import_ndjson, LogError, LogRecord};
pub use metrics::{
    classify_command, compute_metrics, progress_measure, CommandClass, CommandContext, Metrics, MetricsError,
    ARRIVED_INTENT, LABEL_SLOT, TEACH_INTENT,
};
pub use replay::{parse_script, reconstruct, replay, replay_documents, ReplayError, ReplayOutcome, ScriptEntry};
pub use wire::{ClientEnvelope, ClientMessage, EventBody, ServerBody, ServerMessage, ViewEvent};

pub const TICK_HZ: f64 = 10.0;
pub const DT: f64 = 1.0 / TICK_HZ;
/// Cell size of the floor coloring sent to clients.
pub const FLOOR_RESOLUTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionOptions {
    pub dynamic_viz: bool,
    pub visual_programming: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions { dynamic_viz: true, visual_programming: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Running,
    Succeeded,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub phase: Phase,
    pub tick: u64,
    pub elapsed_s: f64,
    pub options: SessionOptions,
    pub config: serde_json::Value,
    pub robot: Pose,
    pub avatar: Pose,
    pub in_sight: bool,
    pub following: bool,
    pub engine: EngineSnapshot,
    pub sensors: BTreeMap<String, SensorValue>,
    pub samples: Vec<Sample>,
    pub floor: FloorGrid,
    pub goal: Vec<String>,
    pub taught: Vec<String>,
    pub metrics: Metrics,
}

pub struct Session {
    base: Config,
    config: Config,
    options: SessionOptions,
    engine: GuidanceEngine,
    sim: SimState,
    world: WorldState,
    sensors: SensorSnapshot,
    goal: Vec<String>,
    phase: Phase,
    tick: u64,
    start_tick: u64,
    seq: u64,
    wrong: u32,
    out_of_sight: u32,
    last_error: Option<String>,
    log: Vec<LogRecord>,
}

impl Session {
    pub fn new(config: Config, options: SessionOptions) -> Self {
        let engine = config.build_engine();
        let sim = SimState::new(&config.sim_settings());
        let goal = config.goal_labels();
        let mut session = Session {
            base: config.clone(),
            config,
            options,
            engine,
            sim,
            world: WorldState::new(),
            sensors: SensorSnapshot::default(),
            goal,
            phase: Phase::Running,
            tick: 0,
            start_tick: 0,
            seq: 0,
            wrong: 0,
            out_of_sight: 0,
            last_error: None,
            log: Vec::new(),
        };
        session.write_percepts();
        session.sensors = session.world.extract_sensors(&session.config.sensors);
        session
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn options(&self) -> SessionOptions {
        self.options
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    pub fn elapsed_s(&self) -> f64 {
        (self.tick - self.start_tick) as f64 / TICK_HZ
    }

    pub fn engine(&self) -> &GuidanceEngine {
        &self.engine
    }

    pub fn sim(&self) -> &SimState {
        &self.sim
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn taught_goal_labels(&self) -> BTreeSet<String> {
        self.sim.learner.labels().filter(|l| self.goal.iter().any(|g| g == l)).map(String::from).collect()
    }

    fn committed_label(&self) -> Option<&str> {
        self.world.get(LABEL_SLOT).as_str()
    }

    pub fn progress(&self) -> u32 {
        let engaged = self.engine.active_protocol().is_some();
        progress_measure(&self.taught_goal_labels(), &self.goal, engaged, self.committed_label())
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            success: self.phase == Phase::Succeeded,
            regions_taught: self.taught_goal_labels().len() as u32,
            wrong_commands: self.wrong,
            out_of_sight_events: self.out_of_sight,
            duration_s: self.elapsed_s(),
        }
    }

    /// Writes percepts that do not come from the simulation, such as a
    /// battery reading. They take effect at the next tick's sensor update.
    pub fn inject_percepts(&mut self, percepts: &[Percept]) {
        self.world.apply_percepts(percepts, self.tick);
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            phase: self.phase,
            tick: self.tick,
            elapsed_s: self.elapsed_s(),
            options: self.options,
            config: to_json(&self.config),
            robot: self.sim.robot,
            avatar: self.sim.avatar,
            in_sight: self.sim.in_sight(),
            following: self.sim.is_following(),
            engine: self.engine.snapshot(),
            sensors: self.sensors.values.clone(),
            samples: self.sim.learner.samples.clone(),
            floor: self.sim.learner.floor_grid(&self.sim.apartment, FLOOR_RESOLUTION),
            goal: self.goal.clone(),
            taught: self.taught_goal_labels().into_iter().collect(),
            metrics: self.metrics(),
        }
    }

    fn emit(&mut self, out: &mut Vec<ServerMessage>, body: ServerBody) {
        self.seq += 1;
        let msg = ServerMessage { seq: self.seq, tick: self.tick, body };
        self.log.push(LogRecord::Server { tick: self.tick, message: msg.clone() });
        out.push(msg);
    }

    fn emit_event(&mut self, out: &mut Vec<ServerMessage>, event: EventBody) {
        if self.options.dynamic_viz || !event.is_dynamic() {
            self.emit(out, ServerBody::Event(event));
        }
    }

    fn notice(&mut self, out: &mut Vec<ServerMessage>, text: String) {
        self.emit(out, ServerBody::Notice { text });
    }

    pub fn handle_message(&mut self, message: ClientMessage) -> Vec<ServerMessage> {
        self.log.push(LogRecord::Client { tick: self.tick, message: message.clone() });
        let mut out = Vec::new();
        match message {
            ClientMessage::GetSnapshot {} => {
                let snap = self.snapshot();
                self.emit(&mut out, ServerBody::Snapshot { snapshot: Box::new(snap) });
            }
            ClientMessage::Reset {} => self.reset(&mut out),
            _ if self.phase != Phase::Running => {
                let metrics = self.metrics();
                self.emit(&mut out, ServerBody::SessionEnded { success: metrics.success, metrics });
            }
            ClientMessage::Chat { text } => self.chat(&mut out, &text),
            ClientMessage::MoveAvatar { x, y } => self.move_avatar(&mut out, Point::new(x, y)),
            ClientMessage::DefineBehavior { protocol_id, behavior } => {
                self.define_behavior(&mut out, &protocol_id, &behavior)
            }
        }
        out
    }

    /// Reports an undecodable client frame. The session state is unchanged.
    pub fn protocol_error(&mut self, detail: String) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        self.emit(&mut out, ServerBody::ProtocolError { detail });
        out
    }

    fn reset(&mut self, out: &mut Vec<ServerMessage>) {
        let config = self.base.clone();
        self.engine = config.build_engine();
        self.sim = SimState::new(&config.sim_settings());
        self.goal = config.goal_labels();
        self.config = config;
        self.world = WorldState::new();
        self.phase = Phase::Running;
        self.start_tick = self.tick;
        self.wrong = 0;
        self.out_of_sight = 0;
        self.last_error = None;
        self.write_percepts();
        self.sensors = self.world.extract_sensors(&self.config.sensors);
        let snap = self.snapshot();
        self.emit(out, ServerBody::Snapshot { snapshot: Box::new(snap) });
    }

    fn chat(&mut self, out: &mut Vec<ServerMessage>, text: &str) {
        let parsed = parse_utterance(text, &self.config.intents);
        let taught = self.taught_goal_labels();
        let ctx = CommandContext {
            following: self.sim.is_following(),
            in_sight: self.sim.in_sight(),
            goal: &self.goal,
            taught: &taught,
            committed_label: self.committed_label(),
        };
        let class = classify_command(&ctx, &parsed);
        if class == CommandClass::Wrong {
            self.wrong += 1;
        }
        self.log.push(LogRecord::Command {
            tick: self.tick,
            text: text.to_string(),
            intent: parsed.intent().map(String::from),
            class,
        });

        let mut percepts = vec![Percept::new("last_utterance", SensorValue::Text(text.to_string()))];
        let ack = match parsed {
            ParseResult::Recognized { intent, slots } => {
                let stale: Vec<String> =
                    self.world.present_keys().filter(|k| k.starts_with(PENDING_SLOT_PREFIX)).map(String::from).collect();
                self.world.clear_keys(&stale);
                percepts.push(Percept::new(INTENT_KEY, SensorValue::label(&intent)));
                for (slot, value) in &slots {
                    percepts.push(Percept::new(format!("{PENDING_SLOT_PREFIX}{slot}"), SensorValue::label(value)));
                }
                ServerBody::ChatAck { recognized: true, intent: Some(intent), slots: Some(slots) }
            }
            ParseResult::Unrecognized { .. } => ServerBody::ChatAck { recognized: false, intent: None, slots: None },
        };
        self.world.apply_percepts(&percepts, self.tick);
        self.emit(out, ack);
    }

    fn move_avatar(&mut self, out: &mut Vec<ServerMessage>, target: Point) {
        let before = self.sim.in_sight();
        match self.sim.move_avatar(target) {
            MoveResult::Accepted(pose) => {
                if before && !self.sim.in_sight() {
                    self.out_of_sight += 1;
                }
                self.emit(out, ServerBody::AvatarMoved { x: pose.x, y: pose.y });
            }
            MoveResult::Rejected(reason) => self.emit(out, ServerBody::MoveRejected { reason }),
        }
    }

    fn define_behavior(&mut self, out: &mut Vec<ServerMessage>, protocol_id: &str, doc: &serde_json::Value) {
        if !self.options.visual_programming {
            self.emit(out, ServerBody::ProtocolError { detail: "visual programming is disabled".into() });
            return;
        }
        let Some(pi) = self.config.protocols.iter().position(|p| p.id == protocol_id) else {
            let err = ConfigError::new(
                "/protocol_id",
                ErrorCode::UnknownReference,
                format!("no protocol with id {protocol_id}"),
            );
            self.emit(out, ServerBody::DefineRejected { errors: vec![err] });
            return;
        };
        let bi = self.config.protocols[pi].behaviors.len();
        let behavior = match parse_behavior(doc, &format!("/protocols/{pi}/behaviors/{bi}")) {
            Ok(b) => b,
            Err(errors) => {
                self.emit(out, ServerBody::DefineRejected { errors });
                return;
            }
        };
        let mut candidate = self.config.clone();
        candidate.protocols[pi].behaviors.push(behavior.clone());
        candidate.protocols[pi].reindex();
        let errors = validate(&candidate);
        if !errors.is_empty() {
            self.emit(out, ServerBody::DefineRejected { errors });
            return;
        }
        self.engine
            .append_behavior(protocol_id, behavior)
            .expect("validated behavior fits the engine");
        self.config = candidate;
        let snap = self.snapshot();
        self.emit(out, ServerBody::Snapshot { snapshot: Box::new(snap) });
    }

    fn write_percepts(&mut self) {
        let robot = self.sim.robot;
        let avatar = self.sim.avatar;
        let taught = self.taught_goal_labels();
        let mut percepts = vec![
            Percept::new("distance_to_avatar", self.sim.avatar_distance()),
            Percept::new("avatar_pose", SensorValue::label(format!("{:.2},{:.2}", avatar.x, avatar.y))),
            Percept::new("robot_pose", SensorValue::label(format!("{:.2},{:.2}", robot.x, robot.y))),
            Percept::new("following", self.sim.is_following()),
            Percept::new("regions_taught", taught.len() as f64),
        ];
        if let Some(last) = self.sim.learner.samples.last() {
            percepts.push(Percept::new("last_taught_label", SensorValue::label(&last.label)));
        }
        let labels: BTreeSet<&str> = self.sim.learner.labels().collect();
        for label in labels {
            percepts.push(Percept::new(format!("{REGION_KEY_PREFIX}{label}"), true));
        }
        self.world.apply_percepts(&percepts, self.tick);
    }

    /// Advances the session by one 0.1 s tick. Does nothing once the session
    /// has ended.
    pub fn tick(&mut self) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        if self.phase != Phase::Running {
            return out;
        }
        self.tick += 1;

        let sim_events = self.sim.step(DT);
        self.write_percepts();

        let sensors = self.world.extract_sensors(&self.config.sensors);
        let changed: Vec<(String, SensorValue)> = sensors
            .values
            .iter()
            .filter(|(id, v)| self.sensors.get(id) != Some(*v))
            .map(|(id, v)| (id.clone(), v.clone()))
            .collect();
        self.sensors = sensors;
        for (sensor, value) in changed {
            self.emit_event(&mut out, EventBody::View(ViewEvent::SensorUpdate { sensor, value }));
        }

        let mut engine_events = self
            .engine
            .update_preconditions(&self.sensors)
            .expect("config validation guarantees every precondition sensor exists");

        let completed = sim_events.iter().any(|e| matches!(e, SimEvent::ActionCompleted { .. }));
        self.forward_sim_events(&mut out, sim_events);

        if self.engine.executing().is_none() {
            engine_events.extend(self.dispatch_next(&mut out));
        }
        self.forward_engine_events(&mut out, engine_events);
        // a learn dispatched this tick already stored its sample
        let dispatched = self.sim.take_pending();
        self.forward_sim_events(&mut out, dispatched);

        if completed {
            let events = self.complete_executing();
            self.forward_engine_events(&mut out, events);
        } else if self.follow_handoff_ready() {
            let ev = self.sim.finish_active();
            self.forward_sim_events(&mut out, ev.into_iter().collect());
            let events = self.complete_executing();
            self.forward_engine_events(&mut out, events);
        }

        self.check_phase(&mut out);
        out
    }

    fn complete_executing(&mut self) -> Vec<EngineEvent> {
        let Some((_, behavior_id)) = self.engine.executing() else {
            return Vec::new();
        };
        let behavior_id = behavior_id.to_string();
        self.engine.complete_execution(&behavior_id).expect("the executing behavior can complete")
    }

    /// Follow has no natural end; it is handed off as soon as a behavior
    /// that succeeds the executing one in its protocol has every precondition
    /// satisfied.
    fn follow_handoff_ready(&self) -> bool {
        if !self.sim.is_following() {
            return false;
        }
        let Some((ip_id, behavior_id)) = self.engine.executing() else {
            return false;
        };
        let Some(ip) = self.engine.protocol(ip_id) else {
            return false;
        };
        ip.behaviors.iter().any(|b| {
            b.predecessors.iter().any(|p| p == behavior_id)
                && b.preconditions.iter().all(|c| c.status == PreconditionStatus::Satisfied)
        })
    }

    fn dispatch_next(&mut self, out: &mut Vec<ServerMessage>) -> Vec<EngineEvent> {
        let Some(sel) = self.engine.select_next() else {
            return Vec::new();
        };
        let mut events = match self.engine.begin_execution(&sel, &mut self.world) {
            Ok(events) => events,
            Err(e) => {
                let text = format!("behavior {} could not start: {e}", sel.behavior_id);
                if self.last_error.as_deref() != Some(&text) {
                    self.notice(out, text.clone());
                    self.last_error = Some(text);
                }
                return Vec::new();
            }
        };
        self.last_error = None;
        let action = events.iter().find_map(|e| e.dispatched_action()).cloned();
        if let Some(action) = action {
            if let Err(e) = self.sim.dispatch_action(&action) {
                self.notice(out, format!("action {} failed: {e}", action.name));
                events.extend(self.complete_executing());
            }
        }
        events
    }

    fn forward_sim_events(&mut self, out: &mut Vec<ServerMessage>, events: Vec<SimEvent>) {
        for ev in events {
            self.log.push(LogRecord::Sim { tick: self.tick, event: ev.clone() });
            match ev {
                SimEvent::RobotSaid { text } => self.emit(out, ServerBody::RobotSay { text }),
                SimEvent::RegionLearned { .. } => {
                    self.emit_event(out, EventBody::Sim(ev));
                    let grid = self.sim.learner.floor_grid(&self.sim.apartment, FLOOR_RESOLUTION);
                    self.emit_event(out, EventBody::View(ViewEvent::FloorUpdate { grid }));
                }
                other => self.emit_event(out, EventBody::Sim(other)),
            }
        }
    }

    fn forward_engine_events(&mut self, out: &mut Vec<ServerMessage>, events: Vec<EngineEvent>) {
        for ev in events {
            self.log.push(LogRecord::Engine { tick: self.tick, event: ev.clone() });
            if let EngineEvent::ProtocolStatus { protocol_id, status } = &ev {
                let name = self.engine.protocol(protocol_id).map_or(protocol_id.as_str(), |p| p.name.as_str());
                let verb = match status {
                    ProtocolStatus::Active => "is now active",
                    ProtocolStatus::Suspended => "was suspended",
                    ProtocolStatus::Completed => "completed",
                    ProtocolStatus::Inactive => "is inactive again",
                };
                let text = format!("{name} {verb}");
                self.emit_event(out, EventBody::Engine(ev));
                self.notice(out, text);
            } else {
                self.emit_event(out, EventBody::Engine(ev));
            }
        }
    }

    fn check_phase(&mut self, out: &mut Vec<ServerMessage>) {
        let limit = self.config.apartment.time_limit_s;
        let elapsed = self.elapsed_s();
        let done = self.goal.iter().all(|g| self.sim.learner.labels().any(|l| l == g));
        self.phase = if done && elapsed <= limit {
            Phase::Succeeded
        } else if elapsed >= limit {
            Phase::TimedOut
        } else {
            return;
        };
        let metrics = self.metrics();
        self.emit(out, ServerBody::SessionEnded { success: metrics.success, metrics });
    }

}

//! Command classification and the end-of-session metrics, recomputable from
//! a complete session log.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::log::LogRecord;
use super::wire::{ClientMessage, ServerBody};
use crate::config::Config;
use crate::nlu::ParseResult;
use crate::sim::{Point, SimEvent};

pub const TEACH_INTENT: &str = "teach_region";
pub const ARRIVED_INTENT: &str = "arrived";
pub const LABEL_SLOT: &str = "region_label";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub success: bool,
    pub regions_taught: u32,
    pub wrong_commands: u32,
    pub out_of_sight_events: u32,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandClass {
    Needed,
    Wrong,
    Unrecognized,
}

/// What the classifier needs to know about the session at the moment a
/// command arrives, before the command has any effect.
#[derive(Debug, Clone)]
pub struct CommandContext<'a> {
    pub following: bool,
    pub in_sight: bool,
    pub goal: &'a [String],
    pub taught: &'a BTreeSet<String>,
    /// Label committed by the last consumed teach command.
    pub committed_label: Option<&'a str>,
}

impl CommandContext<'_> {
    fn untaught_goal(&self, label: &str) -> bool {
        self.goal.iter().any(|g| g == label) && !self.taught.contains(label)
    }
}

/// A teach command is needed when the robot is idle and the label names a
/// goal region still to be taught. An arrival is needed while the robot
/// follows a visible user toward such a region. Everything else that parses
/// is wrong.
pub fn classify_command(ctx: &CommandContext<'_>, parsed: &ParseResult) -> CommandClass {
    let ParseResult::Recognized { intent, slots } = parsed else {
        return CommandClass::Unrecognized;
    };
    let needed = match intent.as_str() {
        TEACH_INTENT => !ctx.following && slots.get(LABEL_SLOT).is_some_and(|l| ctx.untaught_goal(l)),
        ARRIVED_INTENT => ctx.following && ctx.in_sight && ctx.committed_label.is_some_and(|l| ctx.untaught_goal(l)),
        _ => false,
    };
    if needed {
        CommandClass::Needed
    } else {
        CommandClass::Wrong
    }
}

/// Progress toward the goal: two points per taught goal region plus one
/// while a committed teach is being carried out by an active protocol.
pub fn progress_measure(taught: &BTreeSet<String>, goal: &[String], engaged: bool, committed_label: Option<&str>) -> u32 {
    let done = goal.iter().filter(|g| taught.contains(*g)).count() as u32;
    let carrying = engaged && committed_label.is_some_and(|l| goal.iter().any(|g| g == l) && !taught.contains(l));
    2 * done + u32::from(carrying)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("log does not end with a session_ended record")]
    TruncatedLog,
}

/// Recomputes the metrics of the last completed run in `log`. Out-of-sight
/// events are derived from logged poses rather than trusted from counters.
pub fn compute_metrics(log: &[LogRecord], config: &Config) -> Result<Metrics, MetricsError> {
    let goal = config.goal_labels();
    let radius = config.apartment.perception_radius;
    let mut acc = Fold::new(config);
    let mut result = None;
    for rec in log {
        match rec {
            LogRecord::Client { message: ClientMessage::Reset {}, tick } => {
                acc = Fold::new(config);
                acc.start_tick = *tick;
                result = None;
            }
            _ if acc.ended => {}
            LogRecord::Command { class: CommandClass::Wrong, .. } => acc.wrong += 1,
            LogRecord::Sim { event: SimEvent::RobotMoved { x, y, .. }, .. } => acc.robot = Point::new(*x, *y),
            LogRecord::Sim { event: SimEvent::RegionLearned { label, .. }, .. } => {
                if goal.contains(label) {
                    acc.taught.insert(label.clone());
                }
            }
            LogRecord::Server { message, tick } => match &message.body {
                ServerBody::AvatarMoved { x, y } => {
                    let next = Point::new(*x, *y);
                    let before = acc.robot.distance(acc.avatar) <= radius;
                    let after = acc.robot.distance(next) <= radius;
                    if before && !after {
                        acc.out_of_sight += 1;
                    }
                    acc.avatar = next;
                }
                ServerBody::SessionEnded { success, .. } => {
                    acc.ended = true;
                    result = Some(Metrics {
                        success: *success,
                        regions_taught: acc.taught.len() as u32,
                        wrong_commands: acc.wrong,
                        out_of_sight_events: acc.out_of_sight,
                        duration_s: tick.saturating_sub(acc.start_tick) as f64 / super::TICK_HZ,
                    });
                }
                _ => {}
            },
            _ => {}
        }
    }
    result.ok_or(MetricsError::TruncatedLog)
}

struct Fold {
    robot: Point,
    avatar: Point,
    taught: BTreeSet<String>,
    wrong: u32,
    out_of_sight: u32,
    start_tick: u64,
    ended: bool,
}

impl Fold {
    fn new(config: &Config) -> Self {
        Fold {
            robot: config.apartment.robot_start,
            avatar: config.apartment.avatar_start,
            taught: BTreeSet::new(),
            wrong: 0,
            out_of_sight: 0,
            start_tick: 0,
            ended: false,
        }
    }
}

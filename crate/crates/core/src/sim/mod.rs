//! 2D apartment simulation: avatar teleports, perception radius, follow and
//! navigate motion over an occupancy grid, and nearest-neighbour region
//! learning.

mod geometry;
mod learner;
mod path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guidance::ConcreteAction;
use crate::value::SensorValue;

pub use geometry::{Apartment, Point, Pose, Rect, Room};
pub use learner::{FloorGrid, RegionLearner, Sample};
pub use path::{advance, polyline_length, OccupancyGrid};

pub const AVATAR_RADIUS: f64 = 0.25;
pub const MIN_AVATAR_ROBOT_SPACING: f64 = 0.5;
pub const FOLLOW_STANDOFF: f64 = 1.0;
pub const GRID_RESOLUTION: f64 = 0.1;
pub const ROBOT_CLEARANCE: f64 = 0.15;
pub const ARRIVAL_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    OutOfBounds,
    InsideWall,
    TooCloseToRobot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoveResult {
    Accepted(Pose),
    Rejected(RejectReason),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimEvent {
    RobotMoved { x: f64, y: f64, heading: f64 },
    ActionCompleted { action: String },
    AvatarSighted,
    AvatarLost,
    RobotSaid { text: String },
    RegionLearned { x: f64, y: f64, label: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("an action is already running")]
    ExecutorBusy,
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("action {action} is missing a usable {param} parameter")]
    BadParam { action: String, param: String },
    #[error("region label must not be empty")]
    EmptyLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActiveAction {
    /// Runs until ended externally via [`SimState::finish_active`].
    Follow,
    Navigate { goal: Point },
    Say,
    Learn,
}

impl ActiveAction {
    pub fn name(&self) -> &'static str {
        match self {
            ActiveAction::Follow => "follow",
            ActiveAction::Navigate { .. } => "navigate",
            ActiveAction::Say => "say",
            ActiveAction::Learn => "learn",
        }
    }
}

/// Simulation parameters that come from configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub apartment: Apartment,
    pub robot_start: Point,
    pub avatar_start: Point,
    pub perception_radius: f64,
    pub speed: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub apartment: Apartment,
    pub robot: Pose,
    pub avatar: Pose,
    pub perception_radius: f64,
    pub learner: RegionLearner,
    pub speed: f64,
    pub tick: u64,
    active: Option<ActiveAction>,
    pending: Vec<SimEvent>,
    sighted: bool,
    grid: OccupancyGrid,
}

impl SimState {
    pub fn new(settings: &SimSettings) -> Self {
        let mut sim = SimState {
            grid: OccupancyGrid::build(&settings.apartment, GRID_RESOLUTION, ROBOT_CLEARANCE),
            apartment: settings.apartment.clone(),
            robot: Pose::at(settings.robot_start),
            avatar: Pose::at(settings.avatar_start),
            perception_radius: settings.perception_radius,
            learner: RegionLearner::new(settings.tau),
            speed: settings.speed,
            tick: 0,
            active: None,
            pending: Vec::new(),
            sighted: false,
        };
        sim.sighted = sim.in_sight();
        sim
    }

    pub fn active_action(&self) -> Option<&ActiveAction> {
        self.active.as_ref()
    }

    pub fn is_following(&self) -> bool {
        matches!(self.active, Some(ActiveAction::Follow))
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn avatar_distance(&self) -> f64 {
        self.robot.point().distance(self.avatar.point())
    }

    /// Pure distance test; walls do not occlude. The boundary counts as visible.
    pub fn in_sight(&self) -> bool {
        self.avatar_distance() <= self.perception_radius
    }

    /// Teleports the avatar if the target is inside the bounds, clear of walls
    /// and not too close to the robot. Rejections leave the state untouched.
    pub fn move_avatar(&mut self, target: Point) -> MoveResult {
        if !self.apartment.in_bounds(target) {
            return MoveResult::Rejected(RejectReason::OutOfBounds);
        }
        if self.apartment.hits_wall(target, AVATAR_RADIUS) {
            return MoveResult::Rejected(RejectReason::InsideWall);
        }
        if target.distance(self.robot.point()) < MIN_AVATAR_ROBOT_SPACING {
            return MoveResult::Rejected(RejectReason::TooCloseToRobot);
        }
        self.avatar.x = target.x;
        self.avatar.y = target.y;
        MoveResult::Accepted(self.avatar)
    }

    pub fn teach_region(&mut self, label: &str) -> Result<Sample, SimError> {
        if label.is_empty() {
            return Err(SimError::EmptyLabel);
        }
        Ok(self.learner.add(self.robot.x, self.robot.y, label).clone())
    }

    pub fn dispatch_action(&mut self, action: &ConcreteAction) -> Result<(), SimError> {
        if self.active.is_some() {
            return Err(SimError::ExecutorBusy);
        }
        let param = |name: &str| {
            action.param(name).ok_or_else(|| SimError::BadParam {
                action: action.name.clone(),
                param: name.to_string(),
            })
        };
        let next = match action.name.as_str() {
            "follow" => {
                param("target")?;
                ActiveAction::Follow
            }
            "navigate" => {
                let goal = param("goal")?;
                let goal = self.resolve_goal(goal).ok_or_else(|| SimError::BadParam {
                    action: action.name.clone(),
                    param: "goal".into(),
                })?;
                ActiveAction::Navigate { goal }
            }
            "say" => {
                let text = param("text")?.to_string();
                self.pending.push(SimEvent::RobotSaid { text });
                ActiveAction::Say
            }
            "learn" => {
                let label = param("label")?.as_str().unwrap_or_default().to_string();
                let sample = self.teach_region(&label)?;
                self.pending.push(SimEvent::RegionLearned { x: sample.x, y: sample.y, label: sample.label });
                ActiveAction::Learn
            }
            other => return Err(SimError::UnknownAction(other.to_string())),
        };
        self.active = Some(next);
        Ok(())
    }

    /// `"x,y"` coordinates, or the most recent sample with that label.
    fn resolve_goal(&self, goal: &SensorValue) -> Option<Point> {
        let s = goal.as_str()?;
        if let Some((x, y)) = s.split_once(',') {
            if let (Ok(x), Ok(y)) = (x.trim().parse(), y.trim().parse()) {
                return Some(Point::new(x, y));
            }
        }
        self.learner
            .samples
            .iter()
            .rev()
            .find(|smp| smp.label == s)
            .map(|smp| Point::new(smp.x, smp.y))
    }

    /// Events queued by dispatches since the last step.
    pub fn take_pending(&mut self) -> Vec<SimEvent> {
        std::mem::take(&mut self.pending)
    }

    /// Ends the running action, if any, as completed.
    pub fn finish_active(&mut self) -> Option<SimEvent> {
        self.active
            .take()
            .map(|a| SimEvent::ActionCompleted { action: a.name().to_string() })
    }

    pub fn step(&mut self, dt: f64) -> Vec<SimEvent> {
        assert!(dt > 0.0, "step requires a positive dt");
        self.tick += 1;
        let mut events = std::mem::take(&mut self.pending);
        match self.active.clone() {
            Some(ActiveAction::Follow) => {
                if self.in_sight() {
                    if let Some(ev) = self.move_toward(self.avatar.point(), FOLLOW_STANDOFF, dt) {
                        events.push(ev);
                    }
                }
            }
            Some(ActiveAction::Navigate { goal }) => {
                if let Some(ev) = self.move_toward(goal, 0.0, dt) {
                    events.push(ev);
                }
                let arrived = self.robot.point().distance(goal) <= ARRIVAL_TOLERANCE;
                let stuck = self.grid.plan(self.robot.point(), goal).is_none();
                if arrived || stuck {
                    events.extend(self.finish_active());
                }
            }
            Some(ActiveAction::Say) | Some(ActiveAction::Learn) => {
                events.extend(self.finish_active());
            }
            None => {}
        }
        let sighted = self.in_sight();
        if sighted != self.sighted {
            self.sighted = sighted;
            events.push(if sighted { SimEvent::AvatarSighted } else { SimEvent::AvatarLost });
        }
        events
    }

    fn move_toward(&mut self, target: Point, standoff: f64, dt: f64) -> Option<SimEvent> {
        let path = self.grid.plan(self.robot.point(), target)?;
        let travel = (self.speed * dt).min(polyline_length(&path) - standoff);
        if travel <= 1e-9 {
            return None;
        }
        let (p, heading) = advance(&path, travel);
        self.robot = Pose { x: p.x, y: p.y, heading };
        Some(SimEvent::RobotMoved { x: p.x, y: p.y, heading })
    }
}

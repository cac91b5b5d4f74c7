//! Deterministic behavior guidance for a simulated region-teaching robot.

pub mod config;
pub mod guidance;
pub mod nlu;
pub mod perception;
pub mod session;
pub mod sim;
pub mod value;

pub use config::{Config, ConfigError};
pub use guidance::{GuidanceEngine, GuidanceError};
pub use perception::{SensorSnapshot, WorldState};
pub use value::SensorValue;
pub use session::{Session, SessionOptions};

//! Deterministic simulated environment: doors, rooms, robot, battery,
//! boxes, plus scripted fault injection. Provides the action vocabulary
//! the example programs are written against.

mod actions;
pub mod scenario;
mod world;

pub use world::{
    BatteryConfig, BoxConfig, Door, DoorConfig, Durations, Effect, Injection, PassageConfig,
    Robot, SimConfigError, SimWorld, TaskConfig, World, WorldConfig, SENSOR_NAMES,
};

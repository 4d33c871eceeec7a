//! World state, configuration and the per-tick drivers.
//!
//! All randomness is a seeded outcome list fixed at world construction;
//! nothing draws from a live RNG during a run.

use std::cell::{Ref, RefCell, RefMut};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::exec::TickDriver;
use crate::trace::TraceLog;
use crate::Ticks;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub level: i64,
    pub drain_per_tick: i64,
    pub recharge_per_tick: i64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            level: 100,
            drain_per_tick: 1,
            recharge_per_tick: 5,
        }
    }
}

/// Action durations, in ticks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Durations {
    pub open: u64,
    pub pass: u64,
    pub close: u64,
    pub smash: u64,
}

impl Default for Durations {
    fn default() -> Self {
        Durations {
            open: 3,
            pass: 4,
            close: 2,
            smash: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub required: u64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig { required: 10 }
    }
}

/// How far open a door must be to pass, and how far the robot advances
/// into the room after crossing the threshold before the pass counts as
/// done.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassageConfig {
    pub theta: f64,
    pub delta_inside: u64,
}

impl Default for PassageConfig {
    fn default() -> Self {
        PassageConfig {
            theta: 0.8,
            delta_inside: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoorConfig {
    pub id: String,
    pub open_fraction: f64,
    pub locked: bool,
    pub from: String,
    pub to: String,
}

impl Default for DoorConfig {
    fn default() -> Self {
        DoorConfig {
            id: "door".to_string(),
            open_fraction: 0.0,
            locked: false,
            from: "hall".to_string(),
            to: "room".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub id: String,
    pub pos: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub start_room: String,
    /// The room `insideRoom` tests for.
    pub target_room: String,
    pub battery: BatteryConfig,
    pub durations: Durations,
    pub task: TaskConfig,
    pub passage: PassageConfig,
    pub doors: Vec<DoorConfig>,
    pub boxes: Vec<BoxConfig>,
    /// Scripted smash outcomes; generated from the seed when absent.
    pub smash_outcomes: Option<Vec<bool>>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            start_room: "hall".to_string(),
            target_room: "room".to_string(),
            battery: BatteryConfig::default(),
            durations: Durations::default(),
            task: TaskConfig::default(),
            passage: PassageConfig::default(),
            doors: vec![
                DoorConfig {
                    id: "frontDoor".to_string(),
                    ..DoorConfig::default()
                },
                DoorConfig {
                    id: "backDoor".to_string(),
                    ..DoorConfig::default()
                },
            ],
            boxes: Vec::new(),
            smash_outcomes: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Door {
    pub open_fraction: f64,
    pub locked: bool,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone)]
pub struct Robot {
    pub room: String,
    pub pos: i64,
    pub carrying: Option<String>,
}

/// Snapshot of the simulated world. Mutation is serialized through the
/// executor: only actions being polled and the per-tick drivers touch it.
#[derive(Debug)]
pub struct World {
    pub cfg: WorldConfig,
    pub robot: Robot,
    pub doors: BTreeMap<String, Door>,
    pub door_order: Vec<String>,
    pub battery: i64,
    pub task_progress: u64,
    pub boxes: BTreeMap<String, i64>,
    pub box_order: Vec<String>,
    pub clock: Ticks,
    pub failed_sensors: BTreeSet<String>,
    pub(crate) smash_outcomes: VecDeque<bool>,
    pub(crate) live_actuating: u32,
    pub(crate) live_recharge: u32,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("world configuration error: {0}")]
pub struct SimConfigError(pub String);

/// Shared handle to the world; actions capture a clone at construction.
#[derive(Clone)]
pub struct SimWorld {
    pub(crate) w: Rc<RefCell<World>>,
}

impl SimWorld {
    pub fn new(cfg: WorldConfig, seed: u64) -> Result<SimWorld, SimConfigError> {
        if !(0..=100).contains(&cfg.battery.level) {
            return Err(SimConfigError(format!(
                "battery level {} out of 0..=100",
                cfg.battery.level
            )));
        }
        if !(0.0..=1.0).contains(&cfg.passage.theta) {
            return Err(SimConfigError(format!(
                "passage theta {} out of 0..=1",
                cfg.passage.theta
            )));
        }
        let mut doors = BTreeMap::new();
        let mut door_order = Vec::new();
        for d in &cfg.doors {
            if !(0.0..=1.0).contains(&d.open_fraction) {
                return Err(SimConfigError(format!(
                    "door {} open_fraction {} out of 0..=1",
                    d.id, d.open_fraction
                )));
            }
            if doors
                .insert(
                    d.id.clone(),
                    Door {
                        open_fraction: d.open_fraction,
                        locked: d.locked,
                        from: d.from.clone(),
                        to: d.to.clone(),
                    },
                )
                .is_some()
            {
                return Err(SimConfigError(format!("duplicate door id {}", d.id)));
            }
            door_order.push(d.id.clone());
        }
        let mut boxes = BTreeMap::new();
        let mut box_order = Vec::new();
        for b in &cfg.boxes {
            if boxes.insert(b.id.clone(), b.pos).is_some() {
                return Err(SimConfigError(format!("duplicate box id {}", b.id)));
            }
            box_order.push(b.id.clone());
        }
        let smash_outcomes = match &cfg.smash_outcomes {
            Some(list) => list.iter().copied().collect(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..64).map(|_| rng.gen_bool(0.5)).collect()
            }
        };
        let robot = Robot {
            room: cfg.start_room.clone(),
            pos: 0,
            carrying: None,
        };
        let battery = cfg.battery.level;
        Ok(SimWorld {
            w: Rc::new(RefCell::new(World {
                cfg,
                robot,
                doors,
                door_order,
                battery,
                task_progress: 0,
                boxes,
                box_order,
                clock: 0,
                failed_sensors: BTreeSet::new(),
                smash_outcomes,
                live_actuating: 0,
                live_recharge: 0,
            })),
        })
    }

    pub fn state(&self) -> Ref<'_, World> {
        self.w.borrow()
    }

    pub(crate) fn state_mut(&self) -> RefMut<'_, World> {
        self.w.borrow_mut()
    }

    /// The world-rule and injection drivers for a run. Rules apply first
    /// at each tick, then that tick's injections, then behavior wakes.
    pub fn drivers(
        &self,
        mut injections: Vec<Injection>,
    ) -> Result<Vec<Box<dyn TickDriver>>, SimConfigError> {
        {
            let w = self.state();
            for inj in &injections {
                match &inj.effect {
                    Effect::LockDoor { door } | Effect::CloseDoor { door } => {
                        if !w.doors.contains_key(door) {
                            return Err(SimConfigError(format!("unknown door `{door}`")));
                        }
                    }
                    Effect::FailSensor { sensor } => {
                        if !SENSOR_NAMES.contains(&sensor.as_str()) {
                            return Err(SimConfigError(format!(
                                "unknown sensor `{sensor}` (known: {})",
                                SENSOR_NAMES.join(", ")
                            )));
                        }
                    }
                    Effect::SetBattery { level } => {
                        if !(0..=100).contains(level) {
                            return Err(SimConfigError(format!(
                                "setBattery level {level} out of 0..=100"
                            )));
                        }
                    }
                    Effect::TeleportRobot { .. } => {}
                }
            }
        }
        injections.sort_by_key(|i| i.t);
        Ok(vec![
            Box::new(WorldRules { sim: self.clone() }),
            Box::new(InjectionDriver {
                sim: self.clone(),
                schedule: injections,
                next: 0,
            }),
        ])
    }
}

/// Sensing actions that `failSensor` can break.
pub const SENSOR_NAMES: [&str; 5] =
    ["batteryLevel", "isOpen", "insideRoom", "findDoors", "findBox"];

/// A scripted, timed exogenous world change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub t: Ticks,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Effect {
    LockDoor { door: String },
    CloseDoor { door: String },
    TeleportRobot { room: String },
    FailSensor { sensor: String },
    SetBattery { level: i64 },
}

/// Battery drain while actuating, skipped while a recharge is live (the
/// recharge action raises the level itself, so the per-tick delta never
/// exceeds max(drain, recharge)).
struct WorldRules {
    sim: SimWorld,
}

impl TickDriver for WorldRules {
    fn on_tick(&mut self, t: Ticks, trace: &mut TraceLog) {
        let mut w = self.sim.state_mut();
        w.clock = t;
        if t == 0 {
            return;
        }
        if w.live_recharge == 0
            && w.live_actuating > 0
            && w.cfg.battery.drain_per_tick > 0
            && w.battery > 0
        {
            w.battery = (w.battery - w.cfg.battery.drain_per_tick).max(0);
            let level = w.battery;
            trace.world(t, "battery", json!({ "level": level, "cause": "drain" }));
        }
    }
}

struct InjectionDriver {
    sim: SimWorld,
    schedule: Vec<Injection>,
    next: usize,
}

impl TickDriver for InjectionDriver {
    fn on_tick(&mut self, t: Ticks, trace: &mut TraceLog) {
        while let Some(inj) = self.schedule.get(self.next) {
            if inj.t != t {
                break;
            }
            let mut w = self.sim.state_mut();
            match &inj.effect {
                Effect::LockDoor { door } => {
                    let d = w.doors.get_mut(door).expect("validated");
                    d.locked = true;
                    trace.world(t, "injection", json!({ "lockDoor": door }));
                }
                Effect::CloseDoor { door } => {
                    let d = w.doors.get_mut(door).expect("validated");
                    d.open_fraction = 0.0;
                    trace.world(t, "injection", json!({ "closeDoor": door }));
                }
                Effect::TeleportRobot { room } => {
                    w.robot.room = room.clone();
                    trace.world(t, "injection", json!({ "teleportRobot": room }));
                }
                Effect::FailSensor { sensor } => {
                    w.failed_sensors.insert(sensor.clone());
                    trace.world(t, "injection", json!({ "failSensor": sensor }));
                }
                Effect::SetBattery { level } => {
                    w.battery = *level;
                    trace.world(t, "injection", json!({ "setBattery": level }));
                }
            }
            self.next += 1;
        }
    }
}

/// Decrements the live-actuation counters however the owning action ends,
/// including cancellation.
pub(crate) struct ActuationGuard {
    w: Rc<RefCell<World>>,
    recharge: bool,
}

impl ActuationGuard {
    pub(crate) fn new(sim: &SimWorld, recharge: bool) -> ActuationGuard {
        {
            let mut w = sim.state_mut();
            w.live_actuating += 1;
            if recharge {
                w.live_recharge += 1;
            }
        }
        ActuationGuard {
            w: sim.w.clone(),
            recharge,
        }
    }
}

impl Drop for ActuationGuard {
    fn drop(&mut self) {
        let mut w = self.w.borrow_mut();
        w.live_actuating -= 1;
        if self.recharge {
            w.live_recharge -= 1;
        }
    }
}

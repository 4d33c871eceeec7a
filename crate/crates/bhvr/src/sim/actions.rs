//! The standard action vocabulary over the simulated world.
//!
//! Actuating actions do one unit of work per tick and record each world
//! change against their own execution node. Sensing actions complete
//! within the tick and fail with `ConditionFailed` while their sensor is
//! broken — a failure, observable as such, not a `false` reading.

use serde_json::json;

use crate::behavior::Behavior;
use crate::exec::Ctx;
use crate::outcome::{BehaviorError, ErrorKind, Outcome};

use super::world::{ActuationGuard, SimWorld};

fn fail(kind: ErrorKind, source: &str, message: String, ctx: &Ctx) -> Outcome<()> {
    Outcome::Failure(BehaviorError::new(kind, source, message, ctx.now()))
}

impl SimWorld {
    fn sensor_check(&self, name: &str, ctx: &Ctx) -> Option<BehaviorError> {
        if self.state().failed_sensors.contains(name) {
            Some(BehaviorError::new(
                ErrorKind::ConditionFailed,
                name,
                "sensor failure injected",
                ctx.now(),
            ))
        } else {
            None
        }
    }

    /// Open a door over `durations.open` ticks. Fails immediately, or at
    /// any tick, while the door is locked. The fraction is nondecreasing
    /// for the whole run of the action.
    pub fn open(&self, door: &str) -> Behavior<()> {
        let sim = self.clone();
        let door = door.to_string();
        let label = format!("open({door})");
        Behavior::action(label.clone(), true, move |ctx| {
            let sim = sim.clone();
            let door = door.clone();
            let label = label.clone();
            async move {
                let _guard = ActuationGuard::new(&sim, false);
                let steps = sim.state().cfg.durations.open;
                match sim.state().doors.get(&door) {
                    None => return fail(ErrorKind::ActionFailed, &label, format!("unknown door `{door}`"), &ctx),
                    Some(d) if d.locked => {
                        return fail(ErrorKind::ActionFailed, &label, format!("door `{door}` is locked"), &ctx)
                    }
                    Some(_) => {}
                }
                for i in 1..=steps {
                    ctx.sleep(1).await;
                    {
                        let mut w = sim.state_mut();
                        let d = w.doors.get_mut(&door).expect("checked");
                        if d.locked {
                            drop(w);
                            return fail(
                                ErrorKind::ActionFailed,
                                &label,
                                format!("door `{door}` locked while opening"),
                                &ctx,
                            );
                        }
                        d.open_fraction = d.open_fraction.max(i as f64 / steps as f64);
                        let f = d.open_fraction;
                        drop(w);
                        ctx.emit_world("door", json!({ "id": door, "open_fraction": f }));
                    }
                }
                Outcome::Success(())
            }
        })
    }

    /// Cross a door, then advance `passage.delta_inside` ticks further so
    /// the robot ends up strictly inside. While crossing, the door must
    /// stay at least `passage.theta` open at every tick.
    pub fn pass_through(&self, door: &str) -> Behavior<()> {
        let sim = self.clone();
        let door = door.to_string();
        let label = format!("passThrough({door})");
        Behavior::action(label.clone(), true, move |ctx| {
            let sim = sim.clone();
            let door = door.clone();
            let label = label.clone();
            async move {
                let _guard = ActuationGuard::new(&sim, false);
                let (steps, delta, theta) = {
                    let w = sim.state();
                    (w.cfg.durations.pass, w.cfg.passage.delta_inside, w.cfg.passage.theta)
                };
                if !sim.state().doors.contains_key(&door) {
                    return fail(ErrorKind::ActionFailed, &label, format!("unknown door `{door}`"), &ctx);
                }
                for i in 1..=steps {
                    let fraction = sim.state().doors[&door].open_fraction;
                    if fraction < theta {
                        return fail(
                            ErrorKind::ActionFailed,
                            &label,
                            format!("door `{door}` not open enough ({fraction:.2} < {theta})"),
                            &ctx,
                        );
                    }
                    ctx.sleep(1).await;
                    ctx.emit_world("crossing", json!({ "id": door, "step": i, "of": steps }));
                }
                {
                    let mut w = sim.state_mut();
                    let d = &w.doors[&door];
                    let dest = if w.robot.room == d.from {
                        d.to.clone()
                    } else {
                        d.from.clone()
                    };
                    w.robot.room = dest.clone();
                    drop(w);
                    ctx.emit_world("robot_room", json!({ "room": dest }));
                }
                for j in 1..=delta {
                    ctx.sleep(1).await;
                    ctx.emit_world("advance", json!({ "step": j, "of": delta }));
                }
                Outcome::Success(())
            }
        })
    }

    /// Close a door over `durations.close` ticks; always succeeds.
    pub fn close(&self, door: &str) -> Behavior<()> {
        let sim = self.clone();
        let door = door.to_string();
        let label = format!("close({door})");
        Behavior::action(label.clone(), true, move |ctx| {
            let sim = sim.clone();
            let door = door.clone();
            let label = label.clone();
            async move {
                let _guard = ActuationGuard::new(&sim, false);
                let steps = sim.state().cfg.durations.close;
                if !sim.state().doors.contains_key(&door) {
                    return fail(ErrorKind::ActionFailed, &label, format!("unknown door `{door}`"), &ctx);
                }
                let start = sim.state().doors[&door].open_fraction;
                for j in 1..=steps {
                    ctx.sleep(1).await;
                    let f = start * (steps - j) as f64 / steps as f64;
                    {
                        let mut w = sim.state_mut();
                        let d = w.doors.get_mut(&door).expect("checked");
                        d.open_fraction = d.open_fraction.min(f);
                    }
                    ctx.emit_world("door", json!({ "id": door, "open_fraction": f }));
                }
                Outcome::Success(())
            }
        })
    }

    /// Force a door over `durations.smash` ticks. The outcome comes from
    /// the world's scripted list; success leaves the door unlocked and
    /// fully open.
    pub fn smash(&self, door: &str) -> Behavior<()> {
        let sim = self.clone();
        let door = door.to_string();
        let label = format!("smash({door})");
        Behavior::action(label.clone(), true, move |ctx| {
            let sim = sim.clone();
            let door = door.clone();
            let label = label.clone();
            async move {
                let _guard = ActuationGuard::new(&sim, false);
                let steps = sim.state().cfg.durations.smash;
                if !sim.state().doors.contains_key(&door) {
                    return fail(ErrorKind::ActionFailed, &label, format!("unknown door `{door}`"), &ctx);
                }
                for i in 1..=steps {
                    ctx.sleep(1).await;
                    ctx.emit_world("smashing", json!({ "id": door, "step": i, "of": steps }));
                }
                let ok = {
                    let mut w = sim.state_mut();
                    w.smash_outcomes.pop_front().unwrap_or(true)
                };
                if ok {
                    {
                        let mut w = sim.state_mut();
                        let d = w.doors.get_mut(&door).expect("checked");
                        d.locked = false;
                        d.open_fraction = 1.0;
                    }
                    ctx.emit_world("door", json!({ "id": door, "open_fraction": 1.0, "smashed": true }));
                    Outcome::Success(())
                } else {
                    fail(ErrorKind::ActionFailed, &label, format!("smashing `{door}` failed"), &ctx)
                }
            }
        })
    }

    /// Advance the task by one unit per tick until `task.required` units
    /// are done. Progress lives in the world, so an interrupted task
    /// resumes from the work already banked when the action restarts.
    pub fn do_task(&self) -> Behavior<()> {
        let sim = self.clone();
        Behavior::action("doTask", true, move |ctx| {
            let sim = sim.clone();
            async move {
                let _guard = ActuationGuard::new(&sim, false);
                loop {
                    {
                        let w = sim.state();
                        if w.task_progress >= w.cfg.task.required {
                            return Outcome::Success(());
                        }
                    }
                    ctx.sleep(1).await;
                    let p = {
                        let mut w = sim.state_mut();
                        w.task_progress += 1;
                        w.task_progress
                    };
                    ctx.emit_world("task_progress", json!({ "done": p }));
                }
            }
        })
    }

    /// Raise the battery by `recharge_per_tick` per tick until it reads
    /// 100, then succeed. Never interrupted by drain.
    pub fn recharge(&self) -> Behavior<()> {
        let sim = self.clone();
        Behavior::action("recharge", true, move |ctx| {
            let sim = sim.clone();
            async move {
                let _guard = ActuationGuard::new(&sim, true);
                loop {
                    if sim.state().battery >= 100 {
                        return Outcome::Success(());
                    }
                    ctx.sleep(1).await;
                    let level = {
                        let mut w = sim.state_mut();
                        let step = w.cfg.battery.recharge_per_tick;
                        w.battery = (w.battery + step).min(100);
                        w.battery
                    };
                    ctx.emit_world("battery", json!({ "level": level, "cause": "recharge" }));
                }
            }
        })
    }

    /// Walk one position per tick toward a box.
    pub fn move_to(&self, target: &str) -> Behavior<()> {
        let sim = self.clone();
        let target = target.to_string();
        let label = format!("moveTo({target})");
        Behavior::action(label.clone(), true, move |ctx| {
            let sim = sim.clone();
            let target = target.clone();
            let label = label.clone();
            async move {
                let _guard = ActuationGuard::new(&sim, false);
                let Some(&goal) = sim.state().boxes.get(&target) else {
                    return fail(ErrorKind::ActionFailed, &label, format!("unknown box `{target}`"), &ctx);
                };
                loop {
                    let pos = sim.state().robot.pos;
                    if pos == goal {
                        return Outcome::Success(());
                    }
                    ctx.sleep(1).await;
                    let pos = {
                        let mut w = sim.state_mut();
                        w.robot.pos += (goal - pos).signum();
                        w.robot.pos
                    };
                    ctx.emit_world("robot_pos", json!({ "pos": pos }));
                }
            }
        })
    }

    /// The configured door list, in configuration order.
    pub fn find_doors(&self) -> Behavior<Vec<String>> {
        let sim = self.clone();
        Behavior::action("findDoors", false, move |ctx| {
            let sim = sim.clone();
            async move {
                if let Some(e) = sim.sensor_check("findDoors", &ctx) {
                    return Outcome::Failure(e);
                }
                Outcome::Success(sim.state().door_order.clone())
            }
        })
    }

    /// The first configured box.
    pub fn find_box(&self) -> Behavior<String> {
        let sim = self.clone();
        Behavior::action("findBox", false, move |ctx| {
            let sim = sim.clone();
            async move {
                if let Some(e) = sim.sensor_check("findBox", &ctx) {
                    return Outcome::Failure(e);
                }
                match sim.state().box_order.first() {
                    Some(id) => Outcome::Success(id.clone()),
                    None => Outcome::Failure(BehaviorError::new(
                        ErrorKind::ActionFailed,
                        "findBox",
                        "no boxes in the world",
                        ctx.now(),
                    )),
                }
            }
        })
    }

    /// The battery level as an integer in 0..=100.
    pub fn battery_level(&self) -> Behavior<i64> {
        let sim = self.clone();
        Behavior::action("batteryLevel", false, move |ctx| {
            let sim = sim.clone();
            async move {
                if let Some(e) = sim.sensor_check("batteryLevel", &ctx) {
                    return Outcome::Failure(e);
                }
                Outcome::Success(sim.state().battery)
            }
        })
    }

    /// Whether a door is open enough to pass (fraction >= theta).
    pub fn is_open(&self, door: &str) -> Behavior<bool> {
        let sim = self.clone();
        let door = door.to_string();
        Behavior::action(format!("isOpen({door})"), false, move |ctx| {
            let sim = sim.clone();
            let door = door.clone();
            async move {
                if let Some(e) = sim.sensor_check("isOpen", &ctx) {
                    return Outcome::Failure(e);
                }
                let w = sim.state();
                match w.doors.get(&door) {
                    Some(d) => Outcome::Success(d.open_fraction >= w.cfg.passage.theta),
                    None => Outcome::Failure(BehaviorError::new(
                        ErrorKind::ActionFailed,
                        "isOpen",
                        format!("unknown door `{door}`"),
                        ctx.now(),
                    )),
                }
            }
        })
    }

    /// Whether the robot is in the target room.
    pub fn inside_room(&self) -> Behavior<bool> {
        let sim = self.clone();
        Behavior::action("insideRoom", false, move |ctx| {
            let sim = sim.clone();
            async move {
                if let Some(e) = sim.sensor_check("insideRoom", &ctx) {
                    return Outcome::Failure(e);
                }
                let w = sim.state();
                Outcome::Success(w.robot.room == w.cfg.target_room)
            }
        })
    }
}

//! The action library an elaborated program runs against: typed action
//! constructors plus named world objects.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::behavior::Behavior;
use crate::sim::SimWorld;

use super::ast::{Ty, Val};

/// Constructs the behavior for one action invocation from its argument
/// values.
pub type ActionBuilder = Rc<dyn Fn(&[Val]) -> Behavior<Val>>;

#[derive(Clone)]
pub struct ActionEntry {
    pub params: Vec<Ty>,
    pub ret: Ty,
    pub build: ActionBuilder,
}

/// Name resolution target for everything that is not a definition or a
/// bound variable.
#[derive(Clone, Default)]
pub struct Library {
    pub actions: BTreeMap<String, ActionEntry>,
    pub constants: BTreeMap<String, Val>,
}

impl Library {
    pub fn action(
        &mut self,
        name: &str,
        params: Vec<Ty>,
        ret: Ty,
        build: impl Fn(&[Val]) -> Behavior<Val> + 'static,
    ) {
        self.actions.insert(
            name.to_string(),
            ActionEntry {
                params,
                ret,
                build: Rc::new(build),
            },
        );
    }

    pub fn constant(&mut self, name: &str, v: Val) {
        self.constants.insert(name.to_string(), v);
    }

    pub fn constant_ty(v: &Val) -> Ty {
        match v {
            Val::Null => Ty::Null,
            Val::Bool(_) => Ty::Bool,
            Val::Int(_) => Ty::Int,
            Val::Door(_) => Ty::Door,
            Val::Box(_) => Ty::Box,
            Val::List(items) => Ty::list(
                items
                    .first()
                    .map(Library::constant_ty)
                    .unwrap_or(Ty::Null),
            ),
        }
    }
}

fn door_arg(args: &[Val]) -> &str {
    match &args[0] {
        Val::Door(id) => id,
        other => panic!("type invariant violated: expected Door, got {other:?}"),
    }
}

fn box_arg(args: &[Val]) -> &str {
    match &args[0] {
        Val::Box(id) => id,
        other => panic!("type invariant violated: expected Box, got {other:?}"),
    }
}

/// The standard vocabulary over a simulated world, plus one constant per
/// configured door and box.
pub fn sim_library(sim: &SimWorld) -> Library {
    let mut lib = Library::default();

    let s = sim.clone();
    lib.action("open", vec![Ty::Door], Ty::Null, move |args| {
        s.open(door_arg(args)).map(|_| Val::Null)
    });
    let s = sim.clone();
    lib.action("passThrough", vec![Ty::Door], Ty::Null, move |args| {
        s.pass_through(door_arg(args)).map(|_| Val::Null)
    });
    let s = sim.clone();
    lib.action("close", vec![Ty::Door], Ty::Null, move |args| {
        s.close(door_arg(args)).map(|_| Val::Null)
    });
    let s = sim.clone();
    lib.action("smash", vec![Ty::Door], Ty::Null, move |args| {
        s.smash(door_arg(args)).map(|_| Val::Null)
    });
    let s = sim.clone();
    lib.action("doTask", vec![], Ty::Null, move |_| {
        s.do_task().map(|_| Val::Null)
    });
    let s = sim.clone();
    lib.action("recharge", vec![], Ty::Null, move |_| {
        s.recharge().map(|_| Val::Null)
    });
    let s = sim.clone();
    lib.action("moveTo", vec![Ty::Box], Ty::Null, move |args| {
        s.move_to(box_arg(args)).map(|_| Val::Null)
    });
    let s = sim.clone();
    lib.action("findDoors", vec![], Ty::list(Ty::Door), move |_| {
        s.find_doors()
            .map(|ids| Val::List(ids.into_iter().map(Val::Door).collect()))
    });
    let s = sim.clone();
    lib.action("findBox", vec![], Ty::Box, move |_| {
        s.find_box().map(Val::Box)
    });
    let s = sim.clone();
    lib.action("batteryLevel", vec![], Ty::Int, move |_| {
        s.battery_level().map(Val::Int)
    });
    let s = sim.clone();
    lib.action("isOpen", vec![Ty::Door], Ty::Bool, move |args| {
        s.is_open(door_arg(args)).map(Val::Bool)
    });
    let s = sim.clone();
    lib.action("insideRoom", vec![], Ty::Bool, move |_| {
        s.inside_room().map(Val::Bool)
    });

    {
        let w = sim.state();
        for id in &w.door_order {
            lib.constant(id, Val::Door(id.clone()));
        }
        for id in &w.box_order {
            lib.constant(id, Val::Box(id.clone()));
        }
    }
    lib
}

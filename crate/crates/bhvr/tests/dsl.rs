//! Parsing, printing, checking and elaboration of `.bhv` programs.

use bhvr::behavior::run as run_behavior;
use bhvr::dsl::{
    compile, parse, print_program, sim_library, CmpOp, ExprKind, Library, Ty, Val,
};
use bhvr::sim::{SimWorld, WorldConfig};
use bhvr::{bind, fallback_over, monitor, then, ExecConfig};

fn cfg(max_ticks: u64) -> ExecConfig {
    ExecConfig {
        max_ticks,
        ..ExecConfig::default()
    }
}

fn default_sim() -> SimWorld {
    SimWorld::new(WorldConfig::default(), 0).unwrap()
}

// ---------------------------------------------------------------- parsing

#[test]
fn fallback_binds_looser_than_chain() {
    let program = parse("x = a ? b ; c").unwrap();
    let body = &program.defs[0].body;
    match &body.kind {
        ExprKind::Fallback(l, r) => {
            assert!(matches!(l.kind, ExprKind::Var(ref n) if n == "a"));
            assert!(matches!(r.kind, ExprKind::Seq(..)), "b ; c grouped right");
        }
        other => panic!("expected fallback at the top, got {other:?}"),
    }
}

#[test]
fn parallel_sits_between_fallback_and_chain() {
    let program = parse("x = a ? b ||| c ; d").unwrap();
    match &program.defs[0].body.kind {
        ExprKind::Fallback(_, r) => match &r.kind {
            ExprKind::Parallel(_, pr) => {
                assert!(matches!(pr.kind, ExprKind::Seq(..)));
            }
            other => panic!("expected parallel under fallback, got {other:?}"),
        },
        other => panic!("expected fallback at the top, got {other:?}"),
    }
}

#[test]
fn bind_scopes_over_the_rest_of_the_chain() {
    let program = parse("x = doors <- findDoors; a; use(doors)").unwrap();
    match &program.defs[0].body.kind {
        ExprKind::Bind { var, body, .. } => {
            assert_eq!(var, "doors");
            assert!(matches!(body.kind, ExprKind::Seq(..)));
        }
        other => panic!("expected bind, got {other:?}"),
    }
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse("x = (").unwrap_err();
    assert_eq!(err.span.line, 1);
    assert!(err.message.contains("expression"));

    let err = parse("x = a\nx = b").unwrap_err();
    assert_eq!(err.span.line, 2);
    assert!(err.message.contains("duplicate definition"));

    let err = parse("x = a ;; b").unwrap_err();
    assert_eq!((err.span.line, err.span.col), (1, 8));
}

#[test]
fn dangling_bind_is_rejected() {
    let err = parse("x = y <- findDoors").unwrap_err();
    assert!(err.message.contains("must be followed by"));
}

#[test]
fn figure_program_parses_with_parameterized_helpers() {
    let src = r#"
# door entry with retries, under a battery monitor
openPassClose(door) = open(door); passThrough(door); close(door)
attemptDoor(door) = attempt(3, openPassClose(door))
enterRoom = doors <- findDoors; fallbackOver(doors, attemptDoor)
monitorBattery(t) = monitor(cmp(<, 10, batteryLevel), recharge, t)
bt = monitorBattery(enterRoom ; doTask)
"#;
    let program = parse(src).unwrap();
    assert_eq!(program.defs.len(), 5);
    assert_eq!(program.defs[0].params, vec!["door"]);
    let bt = program.def("bt").unwrap();
    match &bt.body.kind {
        ExprKind::Call { name, args } => {
            assert_eq!(name, "monitorBattery");
            assert!(matches!(args[0].kind, ExprKind::Seq(..)));
        }
        other => panic!("expected call, got {other:?}"),
    }
    let mb = program.def("monitorBattery").unwrap();
    match &mb.body.kind {
        ExprKind::Monitor { test, .. } => match &test.kind {
            ExprKind::Cmp { op, constant, .. } => {
                assert_eq!((*op, *constant), (CmpOp::Lt, 10));
            }
            other => panic!("expected cmp test, got {other:?}"),
        },
        other => panic!("expected monitor, got {other:?}"),
    }
}

#[test]
fn printing_reparses_to_the_same_tree() {
    let src = r#"
openPassClose(door) = open(door); passThrough(door); close(door)
backPath = (open(backDoor) ? smash(backDoor)); passThrough(backDoor)
choice = if insideRoom then pure() else (openPassClose(frontDoor) ? backPath)
race = doTask ||| recharge ? pure()
sel = rSelect(cmp(>=, 10, batteryLevel), doTask, recharge)
bt = x <- findBox; moveTo(x); both(doTask, pure()); attempt(2, sel)
"#;
    let program = parse(src).unwrap();
    let printed = print_program(&program);
    let reparsed = parse(&printed).unwrap();
    assert_eq!(program, reparsed, "print/parse round trip:\n{printed}");
}

// ----------------------------------------------------- checking failures

fn try_compile(src: &str) -> Result<(), String> {
    let sim = default_sim();
    let lib = sim_library(&sim);
    compile(src, &lib, "bt").map(|_| ()).map_err(|d| d.render("test.bhv"))
}

#[test]
fn monitor_recovery_must_return_null() {
    let err = try_compile("bt = monitor(insideRoom, batteryLevel, doTask)").unwrap_err();
    assert!(err.contains("monitor recovery must have type Null, found Int"), "{err}");
}

#[test]
fn r_select_branches_must_agree() {
    let err = try_compile("bt = rSelect(insideRoom, batteryLevel, doTask)").unwrap_err();
    assert!(err.contains("branches must share a type"), "{err}");
}

#[test]
fn unbound_names_are_reported_with_spans() {
    let err = try_compile("bt = frobnicate").unwrap_err();
    assert!(err.starts_with("test.bhv:1:6:"), "{err}");
    assert!(err.contains("unbound name"), "{err}");
}

#[test]
fn recursion_is_rejected() {
    let err = try_compile("bt = loop\nloop = doTask; loop").unwrap_err();
    assert!(err.contains("recursive"), "{err}");
}

#[test]
fn action_arguments_must_be_values() {
    let err = try_compile("bt = open(findDoors)").unwrap_err();
    assert!(err.contains("not a value"), "{err}");

    let err = try_compile("bt = open(backDoor ? frontDoor)").unwrap_err();
    assert!(err.contains("must be values"), "{err}");
}

#[test]
fn entry_must_exist_and_take_no_parameters() {
    let err = try_compile("main = doTask").unwrap_err();
    assert!(err.contains("no entry definition"), "{err}");

    let err = try_compile("bt(x) = doTask").unwrap_err();
    assert!(err.contains("must not take parameters"), "{err}");
}

#[test]
fn type_errors_inside_unused_helpers_do_not_block_the_entry() {
    // Helpers are call-by-name templates; an unused one only needs to
    // resolve its names.
    assert!(try_compile("helper = open(frontDoor); isOpen(frontDoor)\nbt = doTask").is_ok());
}

// ------------------------------------------------------------ elaboration

#[test]
fn pure_literal_program_succeeds_immediately() {
    let sim = default_sim();
    let lib = sim_library(&sim);
    let b = compile("bt = pure()", &lib, "bt").unwrap();
    let report = run_behavior(&b, cfg(10), sim.drivers(vec![]).unwrap());
    assert_eq!(report.result.expect_done().clone().unwrap_success(), Val::Null);
    assert_eq!(report.trace.events().last().unwrap().t, 0);
}

#[test]
fn cmp_applies_the_operator_to_the_result() {
    let sim = default_sim();
    let lib = sim_library(&sim);
    let b = compile("bt = cmp(<, 10, batteryLevel)", &lib, "bt").unwrap();
    let report = run_behavior(&b, cfg(10), sim.drivers(vec![]).unwrap());
    assert_eq!(
        report.result.expect_done().clone().unwrap_success(),
        Val::Bool(false),
        "battery starts at 100"
    );
}

#[test]
fn if_checks_once_and_picks_a_branch() {
    let sim = default_sim();
    let lib = sim_library(&sim);
    let src = "bt = o <- isOpen(frontDoor); if o then pure() else open(frontDoor)";
    let b = compile(src, &lib, "bt").unwrap();
    let report = run_behavior(&b, cfg(100), sim.drivers(vec![]).unwrap());
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("open(frontDoor)"), 1);

    // Door already open: the action is skipped.
    let mut wc = WorldConfig::default();
    wc.doors[0].open_fraction = 1.0;
    let sim = SimWorld::new(wc, 0).unwrap();
    let lib = sim_library(&sim);
    let b = compile(src, &lib, "bt").unwrap();
    let report = run_behavior(&b, cfg(100), sim.drivers(vec![]).unwrap());
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("open(frontDoor)"), 0);
}

#[test]
fn elaborated_program_matches_direct_composition() {
    let src = r#"
openPassClose(door) = open(door); passThrough(door); close(door)
enterRoom = doors <- findDoors; fallbackOver(doors, openPassClose)
bt = monitor(cmp(<, 10, batteryLevel), recharge, (enterRoom ; doTask))
"#;
    let sim = default_sim();
    let lib = sim_library(&sim);
    let b = compile(src, &lib, "bt").unwrap();
    let dsl_report = run_behavior(&b, cfg(1000), sim.drivers(vec![]).unwrap());
    assert!(dsl_report.result.expect_done().is_success());

    // The same program, composed directly against the combinator API.
    let sim = default_sim();
    let opc = {
        let sim = sim.clone();
        move |door: String| {
            then(
                sim.open(&door),
                then(sim.pass_through(&door), sim.close(&door)),
            )
        }
    };
    let enter = bind(sim.find_doors(), {
        let opc = opc.clone();
        move |doors: Vec<String>| fallback_over(doors, &opc)
    });
    let direct = monitor(
        sim.battery_level().map(|v| v < 10),
        sim.recharge(),
        then(enter, sim.do_task()),
    );
    let direct_report = run_behavior(&direct, cfg(1000), sim.drivers(vec![]).unwrap());
    assert!(direct_report.result.expect_done().is_success());

    assert_eq!(
        dsl_report.trace.world_signature(),
        direct_report.trace.world_signature(),
        "decision-level equivalence of the two routes"
    );
}

#[test]
fn fallback_over_walks_the_discovered_doors() {
    let mut wc = WorldConfig::default();
    wc.doors[0].locked = true; // frontDoor locked; backDoor works
    let sim = SimWorld::new(wc, 0).unwrap();
    let lib = sim_library(&sim);
    let src = r#"
openPassClose(door) = open(door); passThrough(door); close(door)
bt = doors <- findDoors; fallbackOver(doors, openPassClose)
"#;
    let b = compile(src, &lib, "bt").unwrap();
    let report = run_behavior(&b, cfg(1000), sim.drivers(vec![]).unwrap());
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("open(frontDoor)"), 1);
    assert_eq!(report.trace.count_starts("open(backDoor)"), 1);
    assert_eq!(sim.state().robot.room, "room");
}

#[test]
fn library_types_flow_through_definitions() {
    // A definition parameter used both as a value (door) and the list
    // element type enforcement via fallbackOver.
    let sim = default_sim();
    let lib = sim_library(&sim);
    let src = "check(door) = isOpen(door)\nbt = doors <- findDoors; fallbackOver(doors, check)";
    // isOpen returns Bool; fallbackOver of Bool-typed behaviors is fine.
    let b = compile(src, &lib, "bt").unwrap();
    let report = run_behavior(&b, cfg(100), sim.drivers(vec![]).unwrap());
    // Both doors closed: isOpen succeeds with false on the first door —
    // a completed behavior, so fallbackOver stops there.
    assert_eq!(
        report.result.expect_done().clone().unwrap_success(),
        Val::Bool(false)
    );
}

#[test]
fn unknown_door_constant_fails_resolution() {
    let err = try_compile("bt = open(sideDoor)").unwrap_err();
    assert!(err.contains("unbound name `sideDoor`"), "{err}");
}

#[test]
fn library_without_boxes_has_no_box_constants() {
    let sim = default_sim();
    let lib = sim_library(&sim);
    assert!(lib.constants.contains_key("frontDoor"));
    assert_eq!(
        lib.constants.get("frontDoor"),
        Some(&Val::Door("frontDoor".to_string()))
    );
    assert_eq!(lib.actions["findDoors"].ret, Ty::list(Ty::Door));
}

#[test]
fn empty_library_rejects_every_action() {
    let lib = Library::default();
    let err = compile("bt = doTask", &lib, "bt").unwrap_err();
    assert!(err.message.contains("unbound name"));
}

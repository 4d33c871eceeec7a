//! Semantics of the composition operations, checked against scripted
//! actions and the virtual clock.

use std::cell::Cell;
use std::rc::Rc;

use bhvr::behavior::run_plain;
use bhvr::combinators::switches;
use bhvr::script::{act, act_fail, cond_fn, cond_series, cond_until, flaky, never};
use bhvr::{
    attempt, bind, both, fallback, fallback_over, monitor, parallel, r_select, then, unless,
    when, Behavior, Branch, ErrorKind, ExecConfig, Outcome, TraceKind,
};

fn cfg(max_ticks: u64) -> ExecConfig {
    ExecConfig {
        max_ticks,
        ..ExecConfig::default()
    }
}

fn end_tick<T>(report: &bhvr::RunReport<T>) -> u64 {
    report.trace.events().last().map(|e| e.t).unwrap_or(0)
}

// ---------------------------------------------------------------- bind/then

#[test]
fn bind_passes_value() {
    let b = bind(Behavior::pure(3), |x: i64| Behavior::pure(x + 1));
    let report = run_plain(&b, cfg(10));
    assert_eq!(*report.result.expect_done(), Outcome::Success(4));
    assert_eq!(end_tick(&report), 0, "pure composition takes no ticks");
}

#[test]
fn bind_short_circuits_on_failure() {
    let invoked = Rc::new(Cell::new(false));
    let flag = invoked.clone();
    let b = bind(
        Behavior::<i64>::throw(ErrorKind::ActionFailed, "boom", "scripted"),
        move |_| {
            flag.set(true);
            Behavior::pure(0)
        },
    );
    let report = run_plain(&b, cfg(10));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::ActionFailed);
    assert!(!invoked.get(), "continuation must not be invoked");
}

#[test]
fn bind_monad_laws_at_decision_level() {
    // Left identity: bind(pure(v), f) has the same world-affecting events
    // as f(v).
    let f = |n: u64| act("work", n);
    let lhs = run_plain(&bind(Behavior::pure(3u64), f), cfg(100));
    let rhs = run_plain(&f(3), cfg(100));
    assert_eq!(lhs.trace.world_signature(), rhs.trace.world_signature());

    // Right identity: bind(b, pure) matches b.
    let lhs = run_plain(&bind(act("job", 4), Behavior::pure), cfg(100));
    let rhs = run_plain(&act("job", 4), cfg(100));
    assert_eq!(lhs.trace.world_signature(), rhs.trace.world_signature());
}

#[test]
fn then_runs_first_to_completion_before_second() {
    let b = then(act("first", 2), act("second", 3));
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());
    let trace = &report.trace;
    let first_done = trace
        .iter_kind(TraceKind::Complete)
        .find(|e| e.name == "first")
        .expect("first completes")
        .t;
    let second_start = trace
        .iter_kind(TraceKind::Start)
        .find(|e| e.name == "second")
        .expect("second starts")
        .t;
    assert_eq!(first_done, 2);
    assert_eq!(second_start, 2);
    assert_eq!(end_tick(&report), 5);
}

#[test]
fn then_discards_value_and_propagates_failure() {
    let ok = then(Behavior::pure(99), Behavior::pure(1));
    assert_eq!(
        *run_plain(&ok, cfg(10)).result.expect_done(),
        Outcome::Success(1)
    );

    let failing = then(
        Behavior::<()>::throw(ErrorKind::ActionFailed, "a", "scripted"),
        act("b", 2),
    );
    let report = run_plain(&failing, cfg(10));
    assert!(report.result.expect_done().is_failure());
    assert_eq!(report.trace.count_starts("b"), 0);
}

// ----------------------------------------------------------------- fallback

#[test]
fn fallback_returns_first_success_without_running_second() {
    let b = fallback(Behavior::pure(1), act("unused", 3).map(|_| 2));
    let report = run_plain(&b, cfg(10));
    assert_eq!(*report.result.expect_done(), Outcome::Success(1));
    assert_eq!(report.trace.count_starts("unused"), 0);
}

#[test]
fn fallback_catches_failure() {
    let b = fallback(
        Behavior::throw(ErrorKind::ActionFailed, "locked", "scripted"),
        Behavior::pure(1),
    );
    assert_eq!(
        *run_plain(&b, cfg(10)).result.expect_done(),
            Outcome::Success(1)
        );
}

#[test]
fn fallback_yields_second_error_when_both_fail() {
    let b: Behavior<()> = fallback(
        Behavior::throw(ErrorKind::ActionFailed, "e1", "first"),
        Behavior::throw(ErrorKind::ActionFailed, "e2", "second"),
    );
    let err = run_plain(&b, cfg(10)).result.expect_done().error().expect("failure").clone();
    assert_eq!(err.source_node, "e2");
}

#[test]
fn fallback_catch_laws() {
    // fallback(pure(v), b) is pure(v); fallback(throw, b) is b.
    let b = act("alt", 2);
    let lhs = run_plain(&fallback(Behavior::pure(()), b.clone()), cfg(100));
    assert!(lhs.trace.world_signature().is_empty());

    let lhs = run_plain(
        &fallback(
            Behavior::throw(ErrorKind::ActionFailed, "x", "scripted"),
            b.clone(),
        ),
        cfg(100),
    );
    let rhs = run_plain(&b, cfg(100));
    assert_eq!(lhs.trace.world_signature(), rhs.trace.world_signature());
}

#[test]
fn fallback_over_empty_list_is_exhausted() {
    let b = fallback_over(Vec::<u32>::new(), |_| Behavior::<()>::pure(()));
    let err = run_plain(&b, cfg(10)).result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::Exhausted);
}

#[test]
fn fallback_over_tries_each_item_once_and_keeps_last_error() {
    let b = fallback_over(vec![1u8, 2, 3], |_| act_fail("try", 1));
    let report = run_plain(&b, cfg(100));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::ActionFailed, "last error, not Exhausted");
    assert_eq!(report.trace.count_starts("try"), 3);
}

#[test]
fn fallback_over_first_success_wins() {
    let b = fallback_over(vec![false, true, true], |ok| {
        if ok {
            act("enter", 1)
        } else {
            act_fail("enter", 1)
        }
    });
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("enter"), 2);
}

// ------------------------------------------------------------------ attempt

#[test]
fn attempt_zero_fails_without_running() {
    let b = attempt(0, act("task", 1));
    let report = run_plain(&b, cfg(10));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::Exhausted);
    assert_eq!(report.trace.count_starts("task"), 0);
}

#[test]
fn attempt_runs_exactly_n_times_when_all_fail() {
    let b = attempt(3, act_fail("task", 1));
    let report = run_plain(&b, cfg(100));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::Exhausted);
    assert_eq!(report.trace.count_starts("task"), 3);
}

#[test]
fn attempt_stops_at_first_success() {
    let b = attempt(3, flaky("task", 1, vec![false, true]));
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("task"), 2);
}

// ----------------------------------------------------------- parallel/both

#[test]
fn parallel_completes_with_first_and_cancels_other() {
    let b = parallel(act("short", 3), act("long", 5));
    let report = run_plain(&b, cfg(100));
    assert_eq!(*report.result.expect_done(), Outcome::Success(()));
    assert_eq!(end_tick(&report), 3);
    let cancelled = report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "long");
    assert!(cancelled, "loser must be cancelled");
    report.trace.verify_cancellation_promptness().unwrap();
}

#[test]
fn parallel_with_immediate_success() {
    let b = parallel(Behavior::pure(1), act("slow", 5));
    let report = run_plain(&b, cfg(100));
    assert_eq!(*report.result.expect_done(), Outcome::Success(()));
    assert_eq!(end_tick(&report), 0);
}

#[test]
fn parallel_propagates_winner_failure() {
    let b = parallel(
        Behavior::<()>::throw(ErrorKind::ActionFailed, "boom", "scripted"),
        act("sleeper", 5),
    );
    let report = run_plain(&b, cfg(100));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.source_node, "boom");
    assert!(report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "sleeper"));
}

#[test]
fn both_waits_for_both() {
    let b = both(act("a", 3), act("b", 5));
    let report = run_plain(&b, cfg(100));
    assert_eq!(*report.result.expect_done(), Outcome::Success(()));
    assert_eq!(end_tick(&report), 5);

    let b = both(Behavior::pure(1), Behavior::pure(2));
    let report = run_plain(&b, cfg(100));
    assert_eq!(*report.result.expect_done(), Outcome::Success(()));
    assert_eq!(end_tick(&report), 0);
}

#[test]
fn both_is_fail_fast() {
    let b = both(act_fail("failer", 2), act("steady", 9));
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_failure());
    assert_eq!(end_tick(&report), 2);
    assert!(report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "steady"));
    report.trace.verify_cancellation_promptness().unwrap();
}

#[test]
fn parallel_and_both_commute_on_distinct_durations() {
    for (na, nb) in [(1u64, 4u64), (2, 6), (5, 3), (7, 2)] {
        let p1 = run_plain(&parallel(act("a", na), act("b", nb)), cfg(100));
        let p2 = run_plain(&parallel(act("b", nb), act("a", na)), cfg(100));
        assert_eq!(
            p1.result.expect_done().is_success(),
            p2.result.expect_done().is_success()
        );
        assert_eq!(end_tick(&p1), end_tick(&p2));
        assert_eq!(end_tick(&p1), na.min(nb));

        let b1 = run_plain(&both(act("a", na), act("b", nb)), cfg(100));
        let b2 = run_plain(&both(act("b", nb), act("a", na)), cfg(100));
        assert_eq!(
            b1.result.expect_done().is_success(),
            b2.result.expect_done().is_success()
        );
        assert_eq!(end_tick(&b1), end_tick(&b2));
        assert_eq!(end_tick(&b1), na.max(nb));
    }
}

// ----------------------------------------------------------------- r_select

#[test]
fn r_select_no_switching_returns_left() {
    let b = r_select(
        cond_fn("alwaysTrue", |_| true),
        Behavior::pure(1),
        never("other").map(|_| 0),
    );
    let report = run_plain(&b, cfg(100));
    assert_eq!(*report.result.expect_done(), Outcome::Success(1));
    assert!(switches(&report.trace).is_empty());
}

#[test]
fn r_select_switches_when_test_flips() {
    // False for 4 ticks, then true: right is live first, then left.
    let test = cond_fn("sensed", |t| t >= 4);
    let b = r_select(test, act("left", 3), act("right", 20));
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());

    let sw = switches(&report.trace);
    assert_eq!(sw.len(), 1);
    assert_eq!((sw[0].from, sw[0].to, sw[0].t), (Branch::Right, Branch::Left, 4));

    // The interrupted branch restarts from the beginning when re-selected,
    // so "left" finishes 3 ticks after the switch.
    assert_eq!(end_tick(&report), 7);
    assert!(report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "right"));
    report.trace.verify_cancellation_promptness().unwrap();
}

#[test]
fn r_select_branch_intervals_are_disjoint() {
    // Oscillating test: branches alternate; world events must never
    // overlap in time across branches.
    let test = cond_fn("osc", |t| (t / 3) % 2 == 0);
    let b = r_select(test, act("left", 50), act("right", 50));
    let report = run_plain(&b, cfg(30));
    assert!(report.result.is_budget_exhausted());

    let mut left_ticks = Vec::new();
    let mut right_ticks = Vec::new();
    for ev in report.trace.iter_kind(TraceKind::World) {
        match ev.name.as_str() {
            "left" => left_ticks.push(ev.t),
            "right" => right_ticks.push(ev.t),
            _ => {}
        }
    }
    assert!(!left_ticks.is_empty() && !right_ticks.is_empty());
    for t in &left_ticks {
        assert!(!right_ticks.contains(t), "both branches acted at t={t}");
    }
    report.trace.verify_cancellation_promptness().unwrap();
}

#[test]
fn r_select_symmetry_under_swap_and_negation() {
    let series: Vec<bool> = (0..40).map(|t| (t / 5) % 2 == 0).collect();
    let negated: Vec<bool> = series.iter().map(|b| !b).collect();

    let b1 = r_select(
        cond_series("c", series),
        act("left", 9),
        act("right", 7),
    );
    let b2 = r_select(
        cond_series("c", negated),
        act("right", 7),
        act("left", 9),
    );
    let r1 = run_plain(&b1, cfg(200));
    let r2 = run_plain(&b2, cfg(200));
    assert_eq!(r1.trace.world_signature(), r2.trace.world_signature());
}

#[test]
fn r_select_test_failure_is_condition_failed() {
    let test = cond_until("sensor", |_| false, 5);
    let b = r_select(test, act("left", 50), act("right", 50));
    let report = run_plain(&b, cfg(100));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::ConditionFailed);
    assert_eq!(err.time, 5);
    assert!(report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "right"));
    report.trace.verify_cancellation_promptness().unwrap();
}

#[test]
fn r_select_rejects_actuating_test_statically() {
    let actuating_test = act("probe", 1).map(|_| true);
    let b = r_select(actuating_test, Behavior::pure(1), Behavior::pure(2));
    let err = run_plain(&b, cfg(10)).result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::ActuationInTestPosition);
}

#[test]
fn actuating_leaf_in_test_position_fails_at_runtime() {
    // The static flag cannot see through a bind continuation; the runtime
    // guard on the leaf must catch it.
    let sneaky_test = bind(Behavior::pure(()), |_| act("probe", 1)).map(|_| true);
    assert!(!sneaky_test.actuating(), "flag is an under-approximation");
    let b = r_select(sneaky_test, Behavior::pure(1), Behavior::pure(2));
    let err = run_plain(&b, cfg(10)).result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::ActuationInTestPosition);
}

// ------------------------------------------------------------------ monitor

#[test]
fn monitor_returns_task_outcome_when_test_stays_false() {
    let b = monitor(
        cond_fn("alwaysFalse", |_| false),
        act("recovery", 3),
        Behavior::pure(5),
    );
    let report = run_plain(&b, cfg(100));
    assert_eq!(*report.result.expect_done(), Outcome::Success(5));
    assert_eq!(report.trace.count_starts("recovery"), 0);
}

#[test]
fn monitor_runs_recovery_to_completion_then_restarts_task() {
    // Test is true only in [4, 6); recovery takes 5 ticks and must not be
    // interrupted even though the test goes false again at t=6.
    let test = cond_fn("alarm", |t| (4..6).contains(&t));
    let b = monitor(test, act("recovery", 5), act("task", 10));
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());

    let sw = switches(&report.trace);
    assert_eq!(sw.len(), 2);
    assert_eq!((sw[0].from, sw[0].to, sw[0].t), (Branch::Task, Branch::Recovery, 4));
    assert_eq!((sw[1].from, sw[1].to, sw[1].t), (Branch::Recovery, Branch::Task, 9));

    // No test sampling while recovery is live.
    for ev in report.trace.iter_kind(TraceKind::Test) {
        assert!(
            !(sw[0].t < ev.t && ev.t < sw[1].t),
            "test sampled at t={} during recovery",
            ev.t
        );
    }

    // Task restarts from the beginning: 10 ticks after the switch back.
    assert_eq!(end_tick(&report), 19);
    report.trace.verify_cancellation_promptness().unwrap();
}

#[test]
fn monitor_task_completion_wins_same_tick_race() {
    // The task completes at t=6; the test first reads true at t=6 as well.
    let b = monitor(
        cond_fn("alarm", |t| t >= 6),
        act("recovery", 3),
        act("task", 6),
    );
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());
    assert!(switches(&report.trace).is_empty(), "completion wins the race");
    assert_eq!(report.trace.count_starts("recovery"), 0);
}

#[test]
fn monitor_fails_when_recovery_fails() {
    let b = monitor(
        cond_fn("alarm", |t| t >= 2),
        act_fail("recovery", 2),
        act("task", 10),
    );
    let report = run_plain(&b, cfg(100));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::ActionFailed);
    assert_eq!(err.source_node, "recovery");
}

#[test]
fn monitor_test_failure_distinct_from_false_reading() {
    // A sensor that reads false until it breaks at t=4.
    let b = monitor(
        cond_until("sensor", |_| false, 4),
        act("recovery", 2),
        act("task", 10),
    );
    let report = run_plain(&b, cfg(100));
    let err = report.result.expect_done().error().expect("failure").clone();
    assert_eq!(err.kind, ErrorKind::ConditionFailed);
    assert!(report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "task"));

    // Whereas plain false readings let the task finish.
    let b = monitor(
        cond_fn("sensor", |_| false),
        act("recovery", 2),
        act("task", 10),
    );
    assert!(run_plain(&b, cfg(100)).result.expect_done().is_success());
}

#[test]
fn monitor_repeats_recovery_while_test_stays_true() {
    // True in [2, 14): the first recovery (5 ticks) ends at t=7 with the
    // test still true, so recovery runs again without a switch event.
    let test = cond_fn("alarm", |t| (2..14).contains(&t));
    let b = monitor(test, act("recovery", 5), act("task", 4));
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("recovery"), 3);
    let sw = switches(&report.trace);
    assert_eq!(sw.len(), 2, "one switch out, one switch back");
}

// -------------------------------------------------------------- when/unless

#[test]
fn when_and_unless() {
    let report = run_plain(&unless(true, act("open", 2)), cfg(10));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("open"), 0);

    let report = run_plain(&unless(false, act("open", 2)), cfg(10));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("open"), 1);

    let report = run_plain(&when(true, act_fail("open", 1)), cfg(10));
    assert!(report.result.expect_done().is_failure());
}

// ------------------------------------------------------- scheduling details

#[test]
fn poll_period_sets_the_sampling_cadence() {
    let test = cond_fn("probe", |_| false);
    let b = r_select(test, act("left", 50), act("right", 50));
    let report = bhvr::behavior::run_plain(
        &b,
        ExecConfig {
            max_ticks: 12,
            test_poll_period: 3,
            seed: 0,
        },
    );
    let sample_ticks: Vec<u64> = report
        .trace
        .iter_kind(TraceKind::Test)
        .map(|e| e.t)
        .collect();
    assert_eq!(sample_ticks, vec![0, 3, 6, 9, 12]);
}

#[test]
fn r_select_cancels_the_loser_before_starting_the_other() {
    let b = r_select(cond_fn("flip", |t| t >= 3), act("left", 30), act("right", 30));
    let report = run_plain(&b, cfg(10));
    let trace = &report.trace;
    let cancel_seq = trace
        .iter_kind(TraceKind::Cancel)
        .find(|e| e.name == "right")
        .expect("right cancelled")
        .seq;
    let left_start_seq = trace
        .iter_kind(TraceKind::Start)
        .find(|e| e.name == "left")
        .expect("left started")
        .seq;
    assert!(
        cancel_seq < left_start_seq,
        "the branches are never simultaneously running"
    );
}

#[test]
fn cancelling_a_completed_execution_is_a_noop() {
    use bhvr::Behavior;
    let root = Behavior::from_fn("harness", false, |ctx| {
        Box::pin(async move {
            let child = ctx.spawn(&act("worker", 2));
            let outcome = child.wait().await;
            let before = ctx.now();
            child.cancel();
            child.cancel();
            assert_eq!(ctx.now(), before);
            outcome
        })
    });
    let report = run_plain(&root, cfg(10));
    assert!(report.result.expect_done().is_success());
    assert_eq!(
        report.trace.iter_kind(TraceKind::Cancel).count(),
        0,
        "no cancel events for a finished execution"
    );
}

#[test]
fn cancelled_fallback_never_starts_the_alternative() {
    // The fallback subtree is cancelled mid-first-branch by losing a race;
    // interruption is not failure, so the alternative must not run.
    let guarded = fallback(act("primary", 10), act("alternative", 1));
    let b = parallel(bhvr::script::quiet("timer", 2), guarded);
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("alternative"), 0);
    assert!(report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "primary"));
}

#[test]
fn cancelled_monitor_never_starts_recovery() {
    let m = monitor(
        cond_fn("alarm", |_| false),
        act("recovery", 2),
        act("task", 10),
    );
    let b = parallel(bhvr::script::quiet("timer", 3), m);
    let report = run_plain(&b, cfg(100));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("recovery"), 0);
    assert!(report
        .trace
        .iter_kind(TraceKind::Cancel)
        .any(|e| e.name == "task"));
    report.trace.verify_cancellation_promptness().unwrap();
}

#[test]
fn r_select_accepts_completion_from_a_restarted_branch() {
    // right is live in [0, 2), interrupted, re-selected at 4, and runs to
    // completion from the beginning. Any completion counts, including one
    // after a restart.
    let test = cond_fn("phase", |t| (2..4).contains(&t));
    let b = r_select(test, act("left", 50), act("right", 5));
    let report = run_plain(&b, cfg(50));
    assert!(report.result.expect_done().is_success());
    assert_eq!(report.trace.count_starts("right"), 2, "fresh start after re-selection");
    assert_eq!(end_tick(&report), 4 + 5, "restart runs from the beginning");
}

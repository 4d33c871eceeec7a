//! Scripted toy behaviors: fixed-duration actions, per-run outcome lists
//! and boolean time series. Used by the test suites and by the bridge that
//! compares translated programs against the tick engine.

use std::cell::RefCell;
use std::rc::Rc;

use serde_json::json;

use crate::behavior::Behavior;
use crate::outcome::{BehaviorError, ErrorKind, Outcome};
use crate::Ticks;

/// An actuating action that takes `n` ticks and succeeds, recording one
/// world event per tick of work.
pub fn act(name: &str, n: Ticks) -> Behavior<()> {
    let label = name.to_string();
    Behavior::action(name, true, move |ctx| {
        let label = label.clone();
        async move {
            for i in 1..=n {
                ctx.sleep(1).await;
                ctx.emit_world(&label, json!({ "step": i, "of": n }));
            }
            Outcome::Success(())
        }
    })
}

/// Like [`act`], but fails with `ActionFailed` after doing `n` ticks of work.
pub fn act_fail(name: &str, n: Ticks) -> Behavior<()> {
    let label = name.to_string();
    Behavior::action(name, true, move |ctx| {
        let label = label.clone();
        async move {
            for i in 1..=n {
                ctx.sleep(1).await;
                ctx.emit_world(&label, json!({ "step": i, "of": n }));
            }
            Outcome::Failure(BehaviorError::new(
                ErrorKind::ActionFailed,
                label.clone(),
                "scripted failure",
                ctx.now(),
            ))
        }
    })
}

/// A non-actuating action that just waits `n` ticks.
pub fn quiet(name: &str, n: Ticks) -> Behavior<()> {
    Behavior::action(name, false, move |ctx| async move {
        if n > 0 {
            ctx.sleep(n).await;
        }
        Outcome::Success(())
    })
}

/// An action that never returns. Useful when only the selection of a
/// branch matters, not its completion.
pub fn never(name: &str) -> Behavior<()> {
    Behavior::action(name, false, move |ctx| async move {
        loop {
            ctx.sleep(1).await;
        }
    })
}

/// A condition reading a boolean time series indexed by the current tick.
/// Past the end of the series the last value holds (an empty series reads
/// `false`).
pub fn cond_series(name: &str, series: Vec<bool>) -> Behavior<bool> {
    let series = Rc::new(series);
    Behavior::action(name, false, move |ctx| {
        let series = series.clone();
        async move {
            let t = ctx.now() as usize;
            let v = series
                .get(t)
                .or(series.last())
                .copied()
                .unwrap_or(false);
            Outcome::Success(v)
        }
    })
}

/// A condition computed from the current tick.
pub fn cond_fn(name: &str, f: impl Fn(Ticks) -> bool + 'static) -> Behavior<bool> {
    Behavior::action(name, false, move |ctx| {
        let v = f(ctx.now());
        async move { Outcome::Success(v) }
    })
}

/// A condition that works until `fail_at`, then fails with
/// `ConditionFailed` — a broken sensor, not a `false` reading.
pub fn cond_until(
    name: &str,
    f: impl Fn(Ticks) -> bool + 'static,
    fail_at: Ticks,
) -> Behavior<bool> {
    let label = name.to_string();
    Behavior::action(name, false, move |ctx| {
        let t = ctx.now();
        let label = label.clone();
        let v = f(t);
        async move {
            if t >= fail_at {
                Outcome::Failure(BehaviorError::new(
                    ErrorKind::ConditionFailed,
                    label,
                    "scripted sensor failure",
                    t,
                ))
            } else {
                Outcome::Success(v)
            }
        }
    })
}

/// An action whose success is scripted per run: the k-th execution takes
/// `ticks_per_try` ticks and then succeeds iff `outcomes[k]` (the last
/// entry repeats once the list is exhausted).
pub fn flaky(name: &str, ticks_per_try: Ticks, outcomes: Vec<bool>) -> Behavior<()> {
    let label = name.to_string();
    let state: Rc<RefCell<usize>> = Rc::new(RefCell::new(0));
    let outcomes = Rc::new(outcomes);
    Behavior::action(name, true, move |ctx| {
        let label = label.clone();
        let outcomes = outcomes.clone();
        let state = state.clone();
        async move {
            let run = {
                let mut s = state.borrow_mut();
                let run = *s;
                *s += 1;
                run
            };
            if ticks_per_try > 0 {
                ctx.sleep(ticks_per_try).await;
            }
            let ok = outcomes
                .get(run)
                .or(outcomes.last())
                .copied()
                .unwrap_or(true);
            if ok {
                Outcome::Success(())
            } else {
                Outcome::Failure(BehaviorError::new(
                    ErrorKind::ActionFailed,
                    label,
                    format!("scripted failure on run {run}"),
                    ctx.now(),
                ))
            }
        }
    })
}

//! Composition operations over behaviors.
//!
//! Sequencing (`bind`/`then`) and fallback are non-reactive: they run one
//! child to completion before deciding anything. `parallel` and `both` run
//! children concurrently. The two reactive operations are `r_select`
//! (symmetric switching on a condition) and `monitor` (one-sided: the test
//! interrupts the task, but recovery always runs to completion).
//!
//! Cancellation passes through every combinator: a cancelled composite
//! cancels its live children and triggers no fallback or recovery, because
//! interruption is not failure.

use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;
use std::task::{Context, Poll};

use serde_json::json;

use crate::behavior::{Behavior, ChildHandle, Condition};
use crate::outcome::{BehaviorError, ErrorKind, Outcome};
use crate::trace::{TraceEvent, TraceKind, TraceLog};
use crate::Ticks;

/// Run `a`; on success feed its value to `f` and run the resulting
/// behavior. On failure, yield that failure without invoking `f`.
///
/// Nothing runs at construction time: the two stages are only fused into a
/// single behavior value.
pub fn bind<A: 'static, B: 'static>(
    a: Behavior<A>,
    f: impl Fn(A) -> Behavior<B> + 'static,
) -> Behavior<B> {
    let f = Rc::new(f);
    Behavior::from_fn("bind", a.actuating(), move |ctx| {
        let a = a.clone();
        let f = f.clone();
        Box::pin(async move {
            match a.run_scoped(&ctx).await {
                Outcome::Success(v) => f(v).run_scoped(&ctx).await,
                Outcome::Failure(e) => Outcome::Failure(e),
            }
        })
    })
}

/// Run `a` to completion, discard its value, then run `b`.
pub fn then<A: 'static, B: 'static>(a: Behavior<A>, b: Behavior<B>) -> Behavior<B> {
    let act = a.actuating() || b.actuating();
    Behavior::from_fn("then", act, move |ctx| {
        let a = a.clone();
        let b = b.clone();
        Box::pin(async move {
            match a.run_scoped(&ctx).await {
                Outcome::Success(_) => b.run_scoped(&ctx).await,
                Outcome::Failure(e) => Outcome::Failure(e),
            }
        })
    })
}

/// Non-reactive fallback: run `a`; if it fails, run `b` instead. This is
/// the exception-catch of the language, not a polled alternative — `b`
/// starts only after `a` has actually failed, and a cancellation of the
/// whole node never starts `b`.
pub fn fallback<T: 'static>(a: Behavior<T>, b: Behavior<T>) -> Behavior<T> {
    let act = a.actuating() || b.actuating();
    Behavior::from_fn("fallback", act, move |ctx| {
        let a = a.clone();
        let b = b.clone();
        Box::pin(async move {
            match a.run_scoped(&ctx).await {
                Outcome::Success(v) => Outcome::Success(v),
                Outcome::Failure(_) => b.run_scoped(&ctx).await,
            }
        })
    })
}

/// Try `f(items[0])`, falling back to the next item on failure. The first
/// success wins; if every alternative fails the last error is yielded.
/// An empty list fails immediately with [`ErrorKind::Exhausted`].
pub fn fallback_over<X: Clone + 'static, T: 'static>(
    items: Vec<X>,
    f: impl Fn(X) -> Behavior<T>,
) -> Behavior<T> {
    let mut iter = items.into_iter().rev().map(f);
    let Some(last) = iter.next() else {
        return Behavior::throw(ErrorKind::Exhausted, "fallbackOver", "empty alternative list");
    };
    iter.fold(last, |acc, b| fallback(b, acc))
}

/// Run `task` up to `n` times; the first success wins, `n` failures
/// exhaust the attempt. `attempt(0, _)` fails without running anything.
pub fn attempt<T: 'static>(n: u32, task: Behavior<T>) -> Behavior<T> {
    let mut b = Behavior::throw(ErrorKind::Exhausted, "attempt", "all attempts failed");
    for _ in 0..n {
        b = fallback(task.clone(), b);
    }
    b
}

/// Race two behaviors: complete when the first of them completes, cancel
/// the other, and throw the winner's value away. The winner's failure
/// propagates.
pub fn parallel<A: 'static, B: 'static>(a: Behavior<A>, b: Behavior<B>) -> Behavior<()> {
    let act = a.actuating() || b.actuating();
    Behavior::from_fn("parallel", act, move |ctx| {
        let a = a.clone();
        let b = b.clone();
        Box::pin(async move {
            let ha = ctx.spawn(&a);
            let hb = ctx.spawn(&b);
            match first_of(ha.wait(), hb.wait()).await {
                Either::Left(o) => {
                    drop(hb); // cancel the loser
                    o.map(|_| ())
                }
                Either::Right(o) => {
                    drop(ha);
                    o.map(|_| ())
                }
            }
        })
    })
}

/// Run two behaviors in parallel and wait for both to complete, throwing
/// the values away. Fail-fast: the first failure cancels the other side
/// and propagates.
pub fn both<A: 'static, B: 'static>(a: Behavior<A>, b: Behavior<B>) -> Behavior<()> {
    let act = a.actuating() || b.actuating();
    Behavior::from_fn("both", act, move |ctx| {
        let a = a.clone();
        let b = b.clone();
        Box::pin(async move {
            let ha = ctx.spawn(&a);
            let hb = ctx.spawn(&b);
            match first_of(ha.wait(), hb.wait()).await {
                Either::Left(Outcome::Failure(e)) => {
                    drop(hb);
                    Outcome::Failure(e)
                }
                Either::Right(Outcome::Failure(e)) => {
                    drop(ha);
                    Outcome::Failure(e)
                }
                Either::Left(Outcome::Success(_)) => hb.wait().await.map(|_| ()),
                Either::Right(Outcome::Success(_)) => ha.wait().await.map(|_| ()),
            }
        })
    })
}

/// Which child of a reactive combinator is (or was) live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Left,
    Right,
    Task,
    Recovery,
}

/// A decoded `switch` trace event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Switch {
    pub node: String,
    pub from: Branch,
    pub to: Branch,
    pub t: Ticks,
}

impl Switch {
    pub fn from_event(ev: &TraceEvent) -> Option<Switch> {
        if ev.kind != TraceKind::Switch {
            return None;
        }
        let from = serde_json::from_value(ev.detail.get("from")?.clone()).ok()?;
        let to = serde_json::from_value(ev.detail.get("to")?.clone()).ok()?;
        Some(Switch {
            node: ev.node.clone(),
            from,
            to,
            t: ev.t,
        })
    }
}

/// All switch events in a trace, in order.
pub fn switches(trace: &TraceLog) -> Vec<Switch> {
    trace.events().iter().filter_map(Switch::from_event).collect()
}

fn condition_failed(e: &BehaviorError, now: Ticks) -> BehaviorError {
    if e.kind == ErrorKind::ActuationInTestPosition {
        return e.clone();
    }
    // Keep the failing leaf as the source; only the kind is normalized.
    BehaviorError::new(
        ErrorKind::ConditionFailed,
        e.source_node.clone(),
        format!("test failed: {}", e.message),
        now,
    )
}

fn actuating_test_error(test_label: &str, now: Ticks) -> BehaviorError {
    BehaviorError::new(
        ErrorKind::ActuationInTestPosition,
        test_label,
        "test condition is actuating",
        now,
    )
}

/// Reactive selection: a reactive if-statement.
///
/// `test` is evaluated once, then re-evaluated every `test_poll_period`
/// ticks. While the latest value is `true` the `left` branch is live,
/// while `false` the `right` branch is. On a value change the live branch
/// is cancelled and the other starts from the beginning. The node
/// completes with whichever branch completes first (any completion counts,
/// including one after a restart); a branch failure or a test failure
/// fails the whole node. Test failure is reported as `ConditionFailed`,
/// which is distinct from the test returning `false`.
pub fn r_select<T: 'static>(
    test: Condition,
    left: Behavior<T>,
    right: Behavior<T>,
) -> Behavior<T> {
    let act = left.actuating() || right.actuating();
    Behavior::from_fn("rSelect", act, move |ctx| {
        let test = test.clone();
        let left = left.clone();
        let right = right.clone();
        Box::pin(async move {
            if test.actuating() {
                return Outcome::Failure(actuating_test_error(test.label(), ctx.now()));
            }
            let poll_period = ctx.config().test_poll_period;
            let mut live: Option<(bool, ChildHandle<T>)> = None;
            loop {
                let value = match test.run_as_test(&ctx).await {
                    Outcome::Success(v) => v,
                    Outcome::Failure(e) => {
                        drop(live); // cancel whichever branch is live
                        return Outcome::Failure(condition_failed(&e, ctx.now()));
                    }
                };
                ctx.emit(TraceKind::Test, "rSelect", json!({ "value": value }));
                let switch_to = |v: bool| if v { &left } else { &right };
                match &live {
                    Some((current, _)) if *current == value => {}
                    Some((current, handle)) => {
                        // If the live branch completed at this very tick,
                        // its completion wins over the new reading.
                        if let Some(o) = handle.poll_now() {
                            return o;
                        }
                        ctx.emit(
                            TraceKind::Switch,
                            "rSelect",
                            json!({
                                "from": branch_side(*current),
                                "to": branch_side(value),
                            }),
                        );
                        drop(live.take());
                        live = Some((value, ctx.spawn(switch_to(value))));
                    }
                    None => {
                        live = Some((value, ctx.spawn(switch_to(value))));
                    }
                }
                let (_, handle) = live.as_ref().expect("branch just selected");
                match first_of(handle.wait(), ctx.sleep_poll(poll_period)).await {
                    Either::Left(outcome) => return outcome,
                    Either::Right(()) => {}
                }
            }
        })
    })
}

fn branch_side(test_value: bool) -> Branch {
    if test_value {
        Branch::Left
    } else {
        Branch::Right
    }
}

/// One-sided reactive composition.
///
/// While `test` reads `false`, `task` is live and `test` is re-evaluated on
/// the poll period. When `test` becomes `true` the task is cancelled and
/// `recovery` runs to completion with no test sampling at all; afterwards
/// the whole monitor restarts (the task from its beginning). The monitor
/// succeeds only when `task` completes — if task completion and a `true`
/// reading land on the same tick, completion wins. Failures of task,
/// recovery or test fail the monitor.
pub fn monitor<T: 'static>(
    test: Condition,
    recovery: Behavior<()>,
    task: Behavior<T>,
) -> Behavior<T> {
    let act = recovery.actuating() || task.actuating();
    Behavior::from_fn("monitor", act, move |ctx| {
        let test = test.clone();
        let recovery = recovery.clone();
        let task = task.clone();
        Box::pin(async move {
            if test.actuating() {
                return Outcome::Failure(actuating_test_error(test.label(), ctx.now()));
            }
            let poll_period = ctx.config().test_poll_period;
            let mut after_recovery = false;
            'restart: loop {
                let value = match test.run_as_test(&ctx).await {
                    Outcome::Success(v) => v,
                    Outcome::Failure(e) => {
                        return Outcome::Failure(condition_failed(&e, ctx.now()))
                    }
                };
                ctx.emit(TraceKind::Test, "monitor", json!({ "value": value }));
                if value {
                    // Run recovery to completion, unmonitored. Back-to-back
                    // recoveries are not a switch; the switch back to the
                    // task is recorded when the task actually restarts.
                    match recovery.run_scoped(&ctx).await {
                        Outcome::Success(()) => {
                            after_recovery = true;
                            continue 'restart;
                        }
                        Outcome::Failure(e) => return Outcome::Failure(e),
                    }
                }
                if std::mem::take(&mut after_recovery) {
                    ctx.emit(
                        TraceKind::Switch,
                        "monitor",
                        json!({ "from": Branch::Recovery, "to": Branch::Task }),
                    );
                }
                let handle = ctx.spawn(&task);
                loop {
                    match first_of(handle.wait(), ctx.sleep_poll(poll_period)).await {
                        Either::Left(outcome) => return outcome,
                        Either::Right(()) => {}
                    }
                    let value = match test.run_as_test(&ctx).await {
                        Outcome::Success(v) => v,
                        Outcome::Failure(e) => {
                            drop(handle);
                            return Outcome::Failure(condition_failed(&e, ctx.now()));
                        }
                    };
                    ctx.emit(TraceKind::Test, "monitor", json!({ "value": value }));
                    if value {
                        // Same-tick race: a task that already completed wins
                        // over the interrupting reading.
                        if let Some(o) = handle.poll_now() {
                            return o;
                        }
                        ctx.emit(
                            TraceKind::Switch,
                            "monitor",
                            json!({ "from": Branch::Task, "to": Branch::Recovery }),
                        );
                        drop(handle);
                        match recovery.run_scoped(&ctx).await {
                            Outcome::Success(()) => {
                                after_recovery = true;
                                continue 'restart;
                            }
                            Outcome::Failure(e) => return Outcome::Failure(e),
                        }
                    }
                }
            }
        })
    })
}

/// Run `a` iff `c` is true, otherwise a null action.
pub fn when(c: bool, a: Behavior<()>) -> Behavior<()> {
    if c {
        a
    } else {
        Behavior::pure(())
    }
}

/// Run `a` iff `c` is false, otherwise a null action.
pub fn unless(c: bool, a: Behavior<()>) -> Behavior<()> {
    when(!c, a)
}

enum Either<A, B> {
    Left(A),
    Right(B),
}

/// Await whichever side resolves first; the left side wins ties because it
/// is polled first.
fn first_of<FA, FB>(a: FA, b: FB) -> FirstOf<FA, FB> {
    FirstOf { a, b }
}

struct FirstOf<FA, FB> {
    a: FA,
    b: FB,
}

impl<FA, FB> Future for FirstOf<FA, FB>
where
    FA: Future + Unpin,
    FB: Future + Unpin,
{
    type Output = Either<FA::Output, FB::Output>;

    fn poll(self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Self::Output> {
        let this = self.get_mut();
        if let Poll::Ready(v) = Pin::new(&mut this.a).poll(cx) {
            return Poll::Ready(Either::Left(v));
        }
        if let Poll::Ready(v) = Pin::new(&mut this.b).poll(cx) {
            return Poll::Ready(Either::Right(v));
        }
        Poll::Pending
    }
}

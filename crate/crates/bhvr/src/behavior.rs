//! The behavior abstraction and the run entry point.
//!
//! A [`Behavior<T>`] is an inert, re-runnable description of an
//! asynchronous action returning `T`. Running it never mutates the
//! description: every execution builds a fresh future, so the same value
//! can be executed any number of times, sequentially or from different
//! combinators.

use std::cell::RefCell;
use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;
use std::task::{Context, Poll, Waker};

use serde_json::{json, Value};

use crate::exec::{Ctx, ExecConfig, Inner, TickDriver};
use crate::outcome::{BehaviorError, ErrorKind, Outcome};
use crate::trace::{TraceKind, TraceLog};
use crate::Ticks;

pub(crate) type BoxFut<T> = Pin<Box<dyn Future<Output = Outcome<T>>>>;

/// A condition is a behavior returning a boolean. By contract it is
/// non-actuating; running an actuating behavior in a test position fails
/// with [`ErrorKind::ActuationInTestPosition`].
pub type Condition = Behavior<bool>;

/// An opaque, re-runnable description of an asynchronous action.
///
/// Leaves are named actions bound to an environment capability; interior
/// nodes are combinator applications. The `actuating` flag is a static
/// under-approximation of "some leaf may actuate": continuations passed to
/// `bind` cannot be inspected, so the authoritative check is the runtime
/// test-position guard on every leaf.
pub struct Behavior<T> {
    label: Rc<str>,
    actuating: bool,
    make: Rc<dyn Fn(Ctx) -> BoxFut<T>>,
}

impl<T> Clone for Behavior<T> {
    fn clone(&self) -> Self {
        Behavior {
            label: self.label.clone(),
            actuating: self.actuating,
            make: self.make.clone(),
        }
    }
}

impl<T> std::fmt::Debug for Behavior<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Behavior")
            .field("label", &self.label)
            .field("actuating", &self.actuating)
            .finish_non_exhaustive()
    }
}

impl<T: 'static> Behavior<T> {
    /// Build a behavior from a future factory. Combinators are built on
    /// this; prefer [`Behavior::action`] for leaves.
    pub fn from_fn(
        label: impl Into<String>,
        actuating: bool,
        make: impl Fn(Ctx) -> BoxFut<T> + 'static,
    ) -> Self {
        Behavior {
            label: Rc::from(label.into()),
            actuating,
            make: Rc::new(make),
        }
    }

    /// A leaf behavior. Each execution invokes `body` afresh with the
    /// execution context. The body's failures surface as `Failure`
    /// outcomes; running an actuating leaf in a test position fails
    /// before the body runs.
    pub fn action<F, Fut>(name: impl Into<String>, actuating: bool, body: F) -> Self
    where
        F: Fn(Ctx) -> Fut + 'static,
        Fut: Future<Output = Outcome<T>> + 'static,
    {
        let name = name.into();
        let guard_name = name.clone();
        Behavior::from_fn(name, actuating, move |ctx| {
            let guard_name = guard_name.clone();
            let fut = body(ctx.clone());
            Box::pin(async move {
                if actuating && ctx.in_test_position() {
                    return Outcome::Failure(BehaviorError::new(
                        ErrorKind::ActuationInTestPosition,
                        guard_name,
                        "actuating behavior executed in a test position",
                        ctx.now(),
                    ));
                }
                fut.await
            })
        })
    }

    /// Completes immediately with `Success(v)`. A null action when `T = ()`.
    pub fn pure(v: T) -> Self
    where
        T: Clone,
    {
        Behavior::from_fn("pure", false, move |_ctx| {
            let v = v.clone();
            Box::pin(async move { Outcome::Success(v) })
        })
    }

    /// Completes immediately with a failure of the given kind.
    pub fn throw(
        kind: ErrorKind,
        source: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        let source = source.into();
        let message = message.into();
        Behavior::from_fn("throw", false, move |ctx| {
            let e = BehaviorError::new(kind, source.clone(), message.clone(), ctx.now());
            Box::pin(async move { Outcome::Failure(e) })
        })
    }

    /// Defer construction until execution time. This is the recursion
    /// primitive: `f` may mention the behavior being defined. The inner
    /// behavior runs as its own task rather than inline, so arbitrarily
    /// deep tail recursion keeps a flat poll stack.
    pub fn defer(f: impl Fn() -> Behavior<T> + 'static) -> Self {
        Behavior::from_fn("defer", false, move |ctx| {
            let inner = f();
            Box::pin(async move {
                let handle = ctx.spawn(&inner);
                handle.wait().await
            })
        })
    }

    /// Apply a pure function to the success value; failures pass through.
    pub fn map<U: 'static>(&self, f: impl Fn(T) -> U + 'static) -> Behavior<U> {
        let inner = self.clone();
        let f = Rc::new(f);
        Behavior::from_fn(format!("map({})", self.label), self.actuating, move |ctx| {
            let inner = inner.clone();
            let f = f.clone();
            Box::pin(async move { inner.run_scoped(&ctx).await.map(&*f) })
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn actuating(&self) -> bool {
        self.actuating
    }

    /// Run this behavior inline as a child of `parent`, giving it its own
    /// execution-node identity in the trace. Dropping the returned future
    /// before completion records a cancel event.
    pub fn run_scoped(&self, parent: &Ctx) -> NodeRun<T> {
        self.instantiate(parent.child())
    }

    /// Like [`Behavior::run_scoped`], but the child executes in test
    /// position: actuating leaves fail instead of running.
    pub fn run_as_test(&self, parent: &Ctx) -> NodeRun<T> {
        let mut ctx = parent.child();
        ctx.in_test = true;
        self.instantiate(ctx)
    }

    pub(crate) fn instantiate(&self, ctx: Ctx) -> NodeRun<T> {
        NodeRun {
            fut: (self.make)(ctx.clone()),
            ctx,
            label: self.label.clone(),
            state: RunState::Created,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RunState {
    Created,
    Started,
    Done,
}

/// One execution of a behavior, as a future yielding its outcome.
///
/// Emits the node's `start` event on first poll and exactly one terminal
/// event: `complete`/`fail` on return, or `cancel` if dropped while live.
pub struct NodeRun<T> {
    fut: BoxFut<T>,
    ctx: Ctx,
    label: Rc<str>,
    state: RunState,
}

impl<T> Future for NodeRun<T> {
    type Output = Outcome<T>;

    fn poll(self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Self::Output> {
        let this = self.get_mut();
        if this.state == RunState::Created {
            this.ctx.emit(TraceKind::Start, &this.label, Value::Null);
            this.state = RunState::Started;
        }
        match this.fut.as_mut().poll(cx) {
            Poll::Pending => Poll::Pending,
            Poll::Ready(outcome) => {
                this.state = RunState::Done;
                match &outcome {
                    Outcome::Success(_) => {
                        this.ctx.emit(TraceKind::Complete, &this.label, Value::Null)
                    }
                    Outcome::Failure(e) => this.ctx.emit(
                        TraceKind::Fail,
                        &this.label,
                        json!({
                            "kind": e.kind,
                            "source": e.source_node,
                            "message": e.message,
                        }),
                    ),
                }
                Poll::Ready(outcome)
            }
        }
    }
}

impl<T> Drop for NodeRun<T> {
    fn drop(&mut self) {
        if self.state == RunState::Started {
            self.ctx.emit(TraceKind::Cancel, &self.label, Value::Null);
        }
    }
}

struct Slot<T> {
    out: Option<Outcome<T>>,
    done: bool,
    waker: Option<Waker>,
}

/// Handle to a spawned child execution.
///
/// Dropping the handle cancels the child (and, transitively, everything the
/// child spawned). Cancelling a finished execution is a no-op. A cancelled
/// execution delivers no outcome: it is neither success nor failure.
pub struct ChildHandle<T> {
    id: u64,
    inner: Rc<Inner>,
    slot: Rc<RefCell<Slot<T>>>,
}

impl<T: 'static> ChildHandle<T> {
    /// Resolve once the child returns. The outcome is delivered once.
    pub fn wait(&self) -> WaitOutcome<T> {
        WaitOutcome {
            slot: self.slot.clone(),
        }
    }

    /// Take the outcome if the child has already returned.
    pub fn poll_now(&self) -> Option<Outcome<T>> {
        let mut s = self.slot.borrow_mut();
        if s.done {
            s.out.take()
        } else {
            None
        }
    }

    pub fn is_done(&self) -> bool {
        self.slot.borrow().done
    }

    /// Cancel the child now. Idempotent; a no-op after completion.
    pub fn cancel(&self) {
        self.inner.cancel_task(self.id);
    }

    pub fn is_live(&self) -> bool {
        self.inner.task_alive(self.id)
    }
}

impl<T> Drop for ChildHandle<T> {
    fn drop(&mut self) {
        self.inner.cancel_task(self.id);
    }
}

/// Future returned by [`ChildHandle::wait`].
pub struct WaitOutcome<T> {
    slot: Rc<RefCell<Slot<T>>>,
}

impl<T> Future for WaitOutcome<T> {
    type Output = Outcome<T>;

    fn poll(self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Self::Output> {
        let mut s = self.slot.borrow_mut();
        if s.done {
            match s.out.take() {
                Some(o) => Poll::Ready(o),
                None => panic!("child outcome already taken"),
            }
        } else {
            s.waker = Some(cx.waker().clone());
            Poll::Pending
        }
    }
}

impl Ctx {
    /// Spawn a behavior as a concurrent child task. The child's events are
    /// attributed to a fresh node under this one.
    pub fn spawn<T: 'static>(&self, b: &Behavior<T>) -> ChildHandle<T> {
        let ctx = self.child();
        self.spawn_with_ctx(b, ctx)
    }

    fn spawn_with_ctx<T: 'static>(&self, b: &Behavior<T>, ctx: Ctx) -> ChildHandle<T> {
        let inner = self.inner.clone();
        let slot = Rc::new(RefCell::new(Slot {
            out: None,
            done: false,
            waker: None,
        }));
        let run = b.instantiate(ctx);
        let slot2 = slot.clone();
        let fut: crate::exec::TaskFuture = Box::pin(async move {
            let o = run.await;
            let waker = {
                let mut s = slot2.borrow_mut();
                s.out = Some(o);
                s.done = true;
                s.waker.take()
            };
            if let Some(w) = waker {
                w.wake();
            }
        });
        let id = inner.add_task(fut);
        ChildHandle { id, inner, slot }
    }
}

/// How a run ended: with the root's outcome, or out of budget with the
/// root still live. Budget exhaustion is an executor-level result, not a
/// behavior failure — it never triggers fallback or recovery.
#[derive(Debug)]
pub enum RunResult<T> {
    Done(Outcome<T>),
    BudgetExhausted { at: Ticks },
}

impl<T> RunResult<T> {
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, RunResult::BudgetExhausted { .. })
    }

    pub fn outcome(self) -> Option<Outcome<T>> {
        match self {
            RunResult::Done(o) => Some(o),
            RunResult::BudgetExhausted { .. } => None,
        }
    }

    #[track_caller]
    pub fn expect_done(&self) -> &Outcome<T> {
        match self {
            RunResult::Done(o) => o,
            RunResult::BudgetExhausted { at } => {
                panic!("run exhausted its tick budget at t={at}")
            }
        }
    }
}

/// A finished run: the result plus the full trace.
#[derive(Debug)]
pub struct RunReport<T> {
    pub result: RunResult<T>,
    pub trace: TraceLog,
}

impl<T> RunReport<T> {
    /// Virtual time of the last recorded event.
    pub fn end_time(&self) -> Ticks {
        self.trace.events().last().map(|e| e.t).unwrap_or(0)
    }
}

/// Drive a behavior to its outcome under the deterministic scheduler.
///
/// `drivers` run at every tick boundary (including tick 0, before the root
/// starts) in the order given; the simulated world uses them for world
/// rules and injections. If the root is still live once the budget is
/// exhausted the whole execution tree is cancelled, which records the
/// matching cancel events at the final tick.
pub fn run<T: 'static>(
    b: &Behavior<T>,
    cfg: ExecConfig,
    mut drivers: Vec<Box<dyn TickDriver>>,
) -> RunReport<T> {
    assert!(cfg.max_ticks > 0, "tick budget must be positive");
    let inner = Rc::new(Inner::new(cfg));
    for d in drivers.iter_mut() {
        d.on_tick(0, &mut inner.trace.borrow_mut());
    }
    let root_ctx = Ctx::root(inner.clone());
    // The root is spawned like any child so the loop below is uniform.
    let handle = root_ctx.spawn_with_ctx(b, Ctx::root(inner.clone()));

    // Steps are a safety net against zero-tick livelock (a cycle that
    // never sleeps); real budget accounting is in ticks.
    let step_cap = inner
        .cfg
        .max_ticks
        .saturating_mul(10_000)
        .max(1_000_000);
    let mut steps: u64 = 0;

    let result = loop {
        inner.drain_wakes();
        let mut done = None;
        while let Some(id) = inner.pop_ready() {
            steps += 1;
            if steps > step_cap {
                break;
            }
            inner.poll_task(id);
            inner.drain_wakes();
            if let Some(o) = handle.poll_now() {
                done = Some(o);
                break;
            }
        }
        if let Some(o) = done {
            break RunResult::Done(o);
        }
        if steps > step_cap {
            break RunResult::BudgetExhausted { at: inner.now() };
        }
        let Some(at) = inner.next_timer_at() else {
            // No runnable work and no timers: the program stalled.
            break RunResult::BudgetExhausted { at: inner.now() };
        };
        if at > inner.cfg.max_ticks {
            break RunResult::BudgetExhausted {
                at: inner.cfg.max_ticks,
            };
        }
        let now = inner.now();
        for t in now + 1..=at {
            inner.set_now(t);
            for d in drivers.iter_mut() {
                d.on_tick(t, &mut inner.trace.borrow_mut());
            }
        }
        inner.fire_timers_at(at);
    };

    // Cancel whatever is still live (no-op on a completed run).
    drop(handle);
    let trace = std::mem::take(&mut *inner.trace.borrow_mut());
    RunReport { result, trace }
}

/// Run with no drivers — convenient for programs over toy actions.
pub fn run_plain<T: 'static>(b: &Behavior<T>, cfg: ExecConfig) -> RunReport<T> {
    run(b, cfg, Vec::new())
}

//! Deterministic single-threaded executor with a virtual tick clock.
//!
//! Executions are logically concurrent tasks multiplexed by one scheduler.
//! A task suspends only on a virtual timer or on a child's completion; the
//! scheduler resumes work in `(tick, wake class, insertion sequence)` order,
//! so the interleaving of observable events is a pure function of the
//! program, the world and the configuration.
//!
//! Cancellation is cooperative and synchronous at tick granularity: a
//! cancelled task is dropped at a scheduler yield point and never runs
//! again, so it cannot affect the world at any tick after the cancel.

use std::cell::{Cell, RefCell};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;
use std::sync::{Arc, Mutex};
use std::task::{Context, Poll, Wake, Waker};

use serde_json::Value;

use crate::trace::{TraceKind, TraceLog};
use crate::Ticks;

/// Wake class for ordinary task timers.
pub(crate) const WAKE_TASK: u8 = 1;
/// Wake class for reactive poll loops. Within a tick these fire after all
/// ordinary wakes, so a child completing at tick `t` is observed before the
/// test loop samples at `t` — the arbitration rule that lets completion win
/// a same-tick race against a test reading.
pub(crate) const WAKE_POLL: u8 = 2;

/// Run configuration for the executor.
#[derive(Debug, Clone)]
pub struct ExecConfig {
    /// Ticks between consecutive test evaluations in `r_select`/`monitor`.
    pub test_poll_period: Ticks,
    /// Tick budget: the run stops with `BudgetExhausted` if the root has
    /// not returned by this virtual time.
    pub max_ticks: Ticks,
    /// Seed for any scripted randomness in the environment.
    pub seed: u64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            test_poll_period: 1,
            max_ticks: 10_000,
            seed: 0,
        }
    }
}

/// A per-tick hook driven by the executor, used by the simulated world for
/// rules (battery drain) and scripted injections. Hooks run when virtual
/// time reaches a tick, before any behavior wakes at that tick.
pub trait TickDriver {
    fn on_tick(&mut self, t: Ticks, trace: &mut TraceLog);
}

pub(crate) type TaskFuture = Pin<Box<dyn Future<Output = ()>>>;

struct TimerEntry {
    at: Ticks,
    class: u8,
    seq: u64,
    waker: Waker,
}

impl TimerEntry {
    fn key(&self) -> (Ticks, u8, u64) {
        (self.at, self.class, self.seq)
    }
}

impl PartialEq for TimerEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for TimerEntry {}
impl PartialOrd for TimerEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for TimerEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

struct WakeList(Mutex<Vec<u64>>);

struct TaskWaker {
    id: u64,
    wakes: Arc<WakeList>,
}

impl Wake for TaskWaker {
    fn wake(self: Arc<Self>) {
        self.wakes.0.lock().expect("wake list poisoned").push(self.id);
    }
}

pub(crate) struct Sched {
    now: Ticks,
    timer_seq: u64,
    next_task: u64,
    // None marks a future checked out for polling.
    tasks: BTreeMap<u64, Option<TaskFuture>>,
    ready: VecDeque<u64>,
    queued: BTreeSet<u64>,
    timers: BinaryHeap<Reverse<TimerEntry>>,
}

pub(crate) struct Inner {
    pub(crate) sched: RefCell<Sched>,
    pub(crate) trace: RefCell<TraceLog>,
    wakes: Arc<WakeList>,
    pub(crate) cfg: ExecConfig,
    // Cancelled futures waiting to be dropped. Dropping one may cancel
    // further descendants; queueing keeps that a loop instead of
    // unbounded recursion through Drop.
    graveyard: RefCell<Vec<TaskFuture>>,
    draining: Cell<bool>,
}

impl Inner {
    pub(crate) fn new(cfg: ExecConfig) -> Inner {
        assert!(cfg.test_poll_period >= 1, "test_poll_period must be >= 1");
        Inner {
            sched: RefCell::new(Sched {
                now: 0,
                timer_seq: 0,
                next_task: 0,
                tasks: BTreeMap::new(),
                ready: VecDeque::new(),
                queued: BTreeSet::new(),
                timers: BinaryHeap::new(),
            }),
            trace: RefCell::new(TraceLog::default()),
            wakes: Arc::new(WakeList(Mutex::new(Vec::new()))),
            cfg,
            graveyard: RefCell::new(Vec::new()),
            draining: Cell::new(false),
        }
    }

    pub(crate) fn now(&self) -> Ticks {
        self.sched.borrow().now
    }

    pub(crate) fn set_now(&self, t: Ticks) {
        self.sched.borrow_mut().now = t;
    }

    pub(crate) fn add_task(&self, fut: TaskFuture) -> u64 {
        let mut s = self.sched.borrow_mut();
        let id = s.next_task;
        s.next_task += 1;
        s.tasks.insert(id, Some(fut));
        if s.queued.insert(id) {
            s.ready.push_back(id);
        }
        id
    }

    /// Remove a task and drop its future. No-op if the task already
    /// finished or was cancelled. Dropping happens outside the scheduler
    /// borrow because it can cancel further descendants.
    pub(crate) fn cancel_task(&self, id: u64) {
        let fut = { self.sched.borrow_mut().tasks.remove(&id).flatten() };
        if let Some(f) = fut {
            self.dispose(f);
        }
    }

    /// Drop a detached future, flattening any cancellations it triggers.
    pub(crate) fn dispose(&self, fut: TaskFuture) {
        self.graveyard.borrow_mut().push(fut);
        if self.draining.get() {
            // An outer dispose loop is already running; it will get to
            // this future.
            return;
        }
        self.draining.set(true);
        loop {
            let next = self.graveyard.borrow_mut().pop();
            match next {
                Some(f) => drop(f),
                None => break,
            }
        }
        self.draining.set(false);
    }

    pub(crate) fn task_alive(&self, id: u64) -> bool {
        self.sched.borrow().tasks.contains_key(&id)
    }

    pub(crate) fn drain_wakes(&self) {
        let ids: Vec<u64> = {
            let mut w = self.wakes.0.lock().expect("wake list poisoned");
            std::mem::take(&mut *w)
        };
        let mut s = self.sched.borrow_mut();
        for id in ids {
            if s.tasks.contains_key(&id) && s.queued.insert(id) {
                s.ready.push_back(id);
            }
        }
    }

    pub(crate) fn pop_ready(&self) -> Option<u64> {
        let mut s = self.sched.borrow_mut();
        let id = s.ready.pop_front()?;
        s.queued.remove(&id);
        Some(id)
    }

    pub(crate) fn poll_task(&self, id: u64) {
        let fut = {
            let mut s = self.sched.borrow_mut();
            match s.tasks.get_mut(&id) {
                Some(slot) => slot.take(),
                None => None,
            }
        };
        let Some(mut fut) = fut else { return };
        let waker = Waker::from(Arc::new(TaskWaker {
            id,
            wakes: self.wakes.clone(),
        }));
        let mut cx = Context::from_waker(&waker);
        let poll = fut.as_mut().poll(&mut cx);
        let to_drop: Option<TaskFuture> = {
            let mut s = self.sched.borrow_mut();
            match s.tasks.remove(&id) {
                // Cancelled while checked out.
                None => Some(fut),
                Some(_placeholder) => match poll {
                    Poll::Pending => {
                        s.tasks.insert(id, Some(fut));
                        None
                    }
                    Poll::Ready(()) => Some(fut),
                },
            }
        };
        if let Some(f) = to_drop {
            self.dispose(f);
        }
    }

    pub(crate) fn register_timer(&self, at: Ticks, class: u8, waker: Waker) {
        let mut s = self.sched.borrow_mut();
        debug_assert!(at > s.now, "timers must be strictly in the future");
        let seq = s.timer_seq;
        s.timer_seq += 1;
        s.timers.push(Reverse(TimerEntry {
            at,
            class,
            seq,
            waker,
        }));
    }

    pub(crate) fn next_timer_at(&self) -> Option<Ticks> {
        self.sched.borrow().timers.peek().map(|e| e.0.at)
    }

    /// Fire every timer registered for tick `at`, in (class, seq) order.
    pub(crate) fn fire_timers_at(&self, at: Ticks) {
        let wakers: Vec<Waker> = {
            let mut s = self.sched.borrow_mut();
            let mut out = Vec::new();
            while s.timers.peek().is_some_and(|e| e.0.at <= at) {
                out.push(s.timers.pop().expect("peeked").0.waker);
            }
            out
        };
        for w in wakers {
            w.wake();
        }
    }

    pub(crate) fn emit(
        &self,
        kind: TraceKind,
        node: &str,
        name: &str,
        detail: Value,
    ) {
        let t = self.now();
        self.trace.borrow_mut().push(t, kind, node, name, detail);
    }
}

/// Execution context handed to a running behavior: its node identity plus
/// access to the clock, the trace and the spawn/cancel machinery.
#[derive(Clone)]
pub struct Ctx {
    pub(crate) inner: Rc<Inner>,
    path: Rc<str>,
    child_seq: Rc<Cell<u32>>,
    /// True while executing in the test position of `r_select`/`monitor`.
    pub(crate) in_test: bool,
}

impl Ctx {
    pub(crate) fn root(inner: Rc<Inner>) -> Ctx {
        Ctx {
            inner,
            path: Rc::from("0"),
            child_seq: Rc::new(Cell::new(0)),
            in_test: false,
        }
    }

    /// A fresh child context; each call yields the next child id.
    pub(crate) fn child(&self) -> Ctx {
        let n = self.child_seq.get();
        self.child_seq.set(n + 1);
        Ctx {
            inner: self.inner.clone(),
            path: Rc::from(format!("{}.{}", self.path, n)),
            child_seq: Rc::new(Cell::new(0)),
            in_test: self.in_test,
        }
    }

    pub fn now(&self) -> Ticks {
        self.inner.now()
    }

    /// This execution node's hierarchical id.
    pub fn node(&self) -> &str {
        &self.path
    }

    pub fn in_test_position(&self) -> bool {
        self.in_test
    }

    pub fn config(&self) -> &ExecConfig {
        &self.inner.cfg
    }

    /// Record an event attributed to this node.
    pub fn emit(&self, kind: TraceKind, name: &str, detail: Value) {
        self.inner.emit(kind, &self.path, name, detail);
    }

    /// Record a world change caused by this node.
    pub fn emit_world(&self, name: &str, detail: Value) {
        self.emit(TraceKind::World, name, detail);
    }

    /// Suspend for `n >= 1` ticks of virtual time.
    pub fn sleep(&self, n: Ticks) -> Sleep {
        assert!(n >= 1, "sleep duration must be >= 1 tick");
        Sleep {
            inner: self.inner.clone(),
            at: self.now() + n,
            class: WAKE_TASK,
            registered: false,
        }
    }

    /// Like [`Ctx::sleep`], but wakes after all ordinary work at the target
    /// tick. Used by the reactive poll loops.
    pub(crate) fn sleep_poll(&self, n: Ticks) -> Sleep {
        assert!(n >= 1);
        Sleep {
            inner: self.inner.clone(),
            at: self.now() + n,
            class: WAKE_POLL,
            registered: false,
        }
    }
}

/// Timer future created by [`Ctx::sleep`].
pub struct Sleep {
    inner: Rc<Inner>,
    at: Ticks,
    class: u8,
    registered: bool,
}

impl Future for Sleep {
    type Output = ();

    fn poll(mut self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<()> {
        if self.inner.now() >= self.at {
            return Poll::Ready(());
        }
        if !self.registered {
            self.inner
                .register_timer(self.at, self.class, cx.waker().clone());
            self.registered = true;
        }
        Poll::Pending
    }
}

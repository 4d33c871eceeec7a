//! A behavior-composition runtime: re-runnable asynchronous behaviors with
//! typed results, composed by sequencing, fallback-as-catch, parallelism and
//! two reactive primitives (`r_select` and `monitor`), plus a classical
//! tick-driven behavior-tree engine used as an oracle, a deterministic
//! simulated robot world, and a small authoring language for scenarios.
//!
//! Everything runs on a single-threaded executor with a virtual integer
//! clock. Given the same program, world, injections and seed, a run produces
//! a byte-identical trace.

pub mod behavior;
pub mod classic;
pub mod combinators;
pub mod dsl;
pub mod exec;
pub mod outcome;
pub mod script;
pub mod sim;
pub mod trace;

/// Virtual time, in scheduler ticks.
pub type Ticks = u64;

pub use behavior::{run, Behavior, ChildHandle, Condition, RunReport, RunResult};
pub use combinators::{
    attempt, bind, both, fallback, fallback_over, monitor, parallel, r_select, then, unless, when,
    Branch, Switch,
};
pub use exec::{Ctx, ExecConfig, TickDriver};
pub use outcome::{BehaviorError, ErrorKind, Outcome};
pub use trace::{TraceEvent, TraceKind, TraceLog};

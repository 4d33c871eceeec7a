//! Classical tick-driven behavior trees.
//!
//! This is a compact implementation of the standard node vocabulary
//! (Sequence, Fallback, their memory variants, Parallel with a success
//! threshold, and the usual decorators) under the usual polling semantics:
//! every round the tree is ticked from the root, and nodes that were
//! running but were not re-ticked this round are halted.
//!
//! It exists as an oracle and analysis target, not as the runtime: the
//! form checker recognizes trees that are nested reactive selections, the
//! translator rewrites those into `r_select` programs, and the rewrites
//! reproduce the standard backchaining and memory-elimination
//! constructions.

mod engine;
mod form;
mod node;
mod rewrite;
mod translate;

pub use engine::{
    const_leaf, engine_behavior, never_leaf, scripted_condition, timed_leaf, BtProgram,
    ConfigError, Engine, LeafFactory, Leaves, TickLeaf, TickRecord, TickedEnd, TickedRun,
};
pub use form::{lint_progress_hazards, reactive_selection_form, FormVerdict, LintFinding};
pub use node::{load_bt, BtNode, NodeError, TickStatus};
pub use rewrite::{backchain, backchain_step, memory_to_reactive, Rewrite};
pub use translate::{rsf_to_behavior, to_r_select, NotInForm, RsfBindings, RsfProgram};

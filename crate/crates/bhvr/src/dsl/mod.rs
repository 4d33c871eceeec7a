//! A small textual language for composing behaviors over the simulated
//! world's action vocabulary, so scenarios are data rather than host
//! code.
//!
//! A `.bhv` source is an ordered list of definitions, `name = expr` or
//! `name(params) = expr`. Operators, loosest first: `?` (fallback),
//! `|||` (parallel), and `;` chains with optional `x <- e` bindings.
//! Reactive composition is spelled out with `rSelect(test, left, right)`
//! and `monitor(test, recovery, task)`; `if c then a else b` is the
//! non-reactive branch that evaluates its condition exactly once.

mod ast;
mod build;
mod check;
mod lexer;
mod library;
mod parser;
mod pretty;

use std::rc::Rc;

use crate::behavior::Behavior;

pub use ast::{CmpOp, Def, Diag, Expr, ExprKind, Literal, Program, Span, Ty, Val};
pub use check::check_program;
pub use library::{sim_library, ActionEntry, Library};
pub use parser::parse;
pub use pretty::{print_def, print_expr, print_program};

/// Check a parsed program and build its entry definition.
pub fn elaborate(program: &Program, lib: &Library, entry: &str) -> Result<Behavior<Val>, Diag> {
    check_program(program, lib, entry)?;
    Ok(build::build_program(
        Rc::new(program.clone()),
        Rc::new(lib.clone()),
        entry,
    ))
}

/// Parse, check and build in one step.
pub fn compile(src: &str, lib: &Library, entry: &str) -> Result<Behavior<Val>, Diag> {
    let program = parse(src)?;
    elaborate(&program, lib, entry)
}

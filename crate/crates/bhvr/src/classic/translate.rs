//! Translation of reactive-selection-form trees into `r_select` programs.
//!
//! `(c ? L) → R` reads: while `c` holds, the guard succeeds and `R` is the
//! live subtree; while it does not, `L` is. So the shape becomes
//! `rSelect(c, translate(R), translate(L))`. A bare postcondition guard
//! `c ? L` completes the moment `c` holds, and a bare precondition guard
//! `c → R` fails the moment it does not.

use std::collections::BTreeMap;

use crate::behavior::Behavior;
use crate::combinators::r_select;
use crate::outcome::ErrorKind;

use super::form::{reactive_selection_form, FormVerdict};
use super::node::BtNode;

/// A translated program over named leaves.
#[derive(Debug, Clone, PartialEq)]
pub enum RsfProgram {
    /// A bound action.
    Leaf(String),
    /// Instant success: a satisfied postcondition guard.
    Done,
    /// Instant failure: a violated precondition guard (named for messages).
    Fail(String),
    Select {
        test: String,
        on_true: Box<RsfProgram>,
        on_false: Box<RsfProgram>,
    },
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("not in reactive selection form at {path}: {reason}")]
pub struct NotInForm {
    pub path: String,
    pub reason: String,
}

/// Rewrite a reactive-selection-form tree into an `rSelect` program.
pub fn to_r_select(node: &BtNode) -> Result<RsfProgram, NotInForm> {
    match reactive_selection_form(node) {
        FormVerdict::InForm => Ok(translate(node)),
        FormVerdict::NotInForm { path, reason } => Err(NotInForm { path, reason }),
        FormVerdict::NotApplicable { path, node_type } => Err(NotInForm {
            path,
            reason: format!("{node_type} is outside the translatable vocabulary"),
        }),
    }
}

fn translate(node: &BtNode) -> RsfProgram {
    match node {
        BtNode::Action { name } => RsfProgram::Leaf(name.clone()),
        BtNode::Condition { name } => RsfProgram::Select {
            test: name.clone(),
            on_true: Box::new(RsfProgram::Done),
            on_false: Box::new(RsfProgram::Fail(name.clone())),
        },
        BtNode::Fallback { children } => match children.as_slice() {
            [BtNode::Condition { name }, right] => RsfProgram::Select {
                test: name.clone(),
                on_true: Box::new(RsfProgram::Done),
                on_false: Box::new(translate(right)),
            },
            _ => unreachable!("form checked"),
        },
        BtNode::Sequence { children } => match children.as_slice() {
            [BtNode::Condition { name }, right] => RsfProgram::Select {
                test: name.clone(),
                on_true: Box::new(translate(right)),
                on_false: Box::new(RsfProgram::Fail(name.clone())),
            },
            [BtNode::Fallback { children: guard }, right] => match guard.as_slice() {
                [BtNode::Condition { name }, left] => RsfProgram::Select {
                    test: name.clone(),
                    on_true: Box::new(translate(right)),
                    on_false: Box::new(translate(left)),
                },
                _ => unreachable!("form checked"),
            },
            _ => unreachable!("form checked"),
        },
        _ => unreachable!("form checked"),
    }
}

impl RsfProgram {
    /// Render as an authoring-language expression.
    pub fn to_dsl_expr(&self) -> String {
        match self {
            RsfProgram::Leaf(name) => name.clone(),
            RsfProgram::Done => "pure()".to_string(),
            // An immediately failing behavior spelled with core operations.
            RsfProgram::Fail(_) => "attempt(0, pure())".to_string(),
            RsfProgram::Select {
                test,
                on_true,
                on_false,
            } => format!(
                "rSelect({}, {}, {})",
                test,
                on_true.to_dsl_expr(),
                on_false.to_dsl_expr()
            ),
        }
    }

    /// Render as a complete program with entry point `bt`.
    pub fn to_dsl_program(&self) -> String {
        format!("bt = {}\n", self.to_dsl_expr())
    }
}

/// Leaf bindings for executing a translated program directly against the
/// combinator runtime.
#[derive(Default)]
pub struct RsfBindings {
    pub conditions: BTreeMap<String, Behavior<bool>>,
    pub actions: BTreeMap<String, Behavior<()>>,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("unbound leaf `{0}`")]
pub struct UnboundLeaf(pub String);

/// Build the behavior a translated program denotes.
pub fn rsf_to_behavior(
    program: &RsfProgram,
    bindings: &RsfBindings,
) -> Result<Behavior<()>, UnboundLeaf> {
    match program {
        RsfProgram::Leaf(name) => bindings
            .actions
            .get(name)
            .cloned()
            .ok_or_else(|| UnboundLeaf(name.clone())),
        RsfProgram::Done => Ok(Behavior::pure(())),
        RsfProgram::Fail(name) => Ok(Behavior::throw(
            ErrorKind::ActionFailed,
            name.clone(),
            "precondition does not hold",
        )),
        RsfProgram::Select {
            test,
            on_true,
            on_false,
        } => {
            let test = bindings
                .conditions
                .get(test)
                .cloned()
                .ok_or_else(|| UnboundLeaf(test.clone()))?;
            let left = rsf_to_behavior(on_true, bindings)?;
            let right = rsf_to_behavior(on_false, bindings)?;
            Ok(r_select(test, left, right))
        }
    }
}

//! Recognizing reactive selection form, and linting for progress hazards.
//!
//! A tree is in reactive selection form when it is built only from nested
//! `(condition ? L) → R` shapes over the binary core vocabulary, so that
//! every action sits in the right-hand branch of its parent and the tested
//! child is always a condition. Such trees have an unambiguous reactive
//! reading; anything else either mixes in non-core nodes (not applicable)
//! or puts a long-running child where the polling semantics would restart
//! it forever.

use super::node::BtNode;

#[derive(Debug, Clone, PartialEq)]
pub enum FormVerdict {
    InForm,
    /// Core vocabulary, but not the nested-selection shape.
    NotInForm { path: String, reason: String },
    /// Uses nodes outside the binary Sequence/Fallback/leaf vocabulary.
    NotApplicable { path: String, node_type: String },
}

impl FormVerdict {
    pub fn is_in_form(&self) -> bool {
        matches!(self, FormVerdict::InForm)
    }
}

/// Check whether a tree is in reactive selection form.
///
/// Accepted shapes, recursively:
/// - an action leaf (degenerate program);
/// - a condition leaf (degenerate guard);
/// - `Fallback[c, R]` with `c` a condition — succeed when `c` holds;
/// - `Sequence[c, R]` with `c` a condition — a precondition guard;
/// - `Sequence[Fallback[c, L], R]` — the full `(c ? L) → R` selection.
pub fn reactive_selection_form(node: &BtNode) -> FormVerdict {
    check(node, "0")
}

fn check(node: &BtNode, path: &str) -> FormVerdict {
    match node {
        BtNode::Action { .. } | BtNode::Condition { .. } => FormVerdict::InForm,
        BtNode::Fallback { children } => {
            let [left, right] = match children.as_slice() {
                [l, r] => [l, r],
                _ => {
                    return FormVerdict::NotInForm {
                        path: path.to_string(),
                        reason: format!(
                            "Fallback must be binary here, found {} children",
                            children.len()
                        ),
                    }
                }
            };
            if !matches!(left, BtNode::Condition { .. }) {
                return FormVerdict::NotInForm {
                    path: path.to_string(),
                    reason: format!(
                        "left child of ? must be a condition, found {}",
                        left.type_name()
                    ),
                };
            }
            check(right, &format!("{path}.1"))
        }
        BtNode::Sequence { children } => {
            let [left, right] = match children.as_slice() {
                [l, r] => [l, r],
                _ => {
                    return FormVerdict::NotInForm {
                        path: path.to_string(),
                        reason: format!(
                            "Sequence must be binary here, found {} children",
                            children.len()
                        ),
                    }
                }
            };
            let guard_ok = match left {
                BtNode::Condition { .. } => FormVerdict::InForm,
                BtNode::Fallback { children } => match children.as_slice() {
                    [BtNode::Condition { .. }, branch] => check(branch, &format!("{path}.0.1")),
                    _ => FormVerdict::NotInForm {
                        path: format!("{path}.0"),
                        reason: "guard must test a condition".to_string(),
                    },
                },
                other => FormVerdict::NotInForm {
                    path: format!("{path}.0"),
                    reason: format!(
                        "left child of -> must be a condition or a (condition ? ...) guard, found {}",
                        other.type_name()
                    ),
                },
            };
            if !guard_ok.is_in_form() {
                return guard_ok;
            }
            check(right, &format!("{path}.1"))
        }
        other => FormVerdict::NotApplicable {
            path: path.to_string(),
            node_type: other.type_name().to_string(),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LintFinding {
    pub path: String,
    pub message: String,
}

/// Progress-problem hazards: a reactive Sequence or Fallback whose
/// non-final child can return Running is re-ticked through that child on
/// every round, so the later children can be restarted forever. Guards of
/// the `(condition ? …)` shape are exempt — their Running means a branch
/// was deliberately selected.
pub fn lint_progress_hazards(node: &BtNode) -> Vec<LintFinding> {
    let mut findings = Vec::new();
    walk(node, "0", &mut findings);
    findings
}

fn walk(node: &BtNode, path: &str, findings: &mut Vec<LintFinding>) {
    match node {
        BtNode::Sequence { children } => {
            for (i, c) in children.iter().enumerate() {
                if i + 1 < children.len() && can_run(c) && !is_guard(c) {
                    findings.push(LintFinding {
                        path: format!("{path}.{i}"),
                        message: format!(
                            "{} can return Running before `{}`'s later children; \
                             once it completes, the next tick restarts it and cancels the rest",
                            describe(c),
                            node.type_name(),
                        ),
                    });
                }
            }
        }
        BtNode::Fallback { children } => {
            for (i, c) in children.iter().enumerate() {
                if i + 1 < children.len() && can_run(c) {
                    findings.push(LintFinding {
                        path: format!("{path}.{i}"),
                        message: format!(
                            "{} keeps being ticked while later alternatives run",
                            describe(c)
                        ),
                    });
                }
            }
        }
        _ => {}
    }
    for (i, c) in node.children().iter().enumerate() {
        walk(c, &format!("{path}.{i}"), findings);
    }
}

fn describe(node: &BtNode) -> String {
    match node {
        BtNode::Action { name } => format!("action `{name}`"),
        BtNode::Condition { name } => format!("condition `{name}`"),
        other => format!("{} subtree", other.type_name()),
    }
}

fn is_guard(node: &BtNode) -> bool {
    match node {
        BtNode::Condition { .. } => true,
        BtNode::Fallback { children } => {
            matches!(children.as_slice(), [BtNode::Condition { .. }, _])
        }
        _ => false,
    }
}

fn can_run(node: &BtNode) -> bool {
    match node {
        BtNode::Action { .. } => true,
        BtNode::Condition { .. } => false,
        BtNode::Repeat { times, children } => *times > 1 || children.iter().any(can_run),
        BtNode::RetryUntilSuccessful { times, children } => {
            *times > 1 || children.iter().any(can_run)
        }
        other => other.children().iter().any(can_run),
    }
}

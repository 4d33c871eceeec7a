//! Tree rewrites: backchaining, and the memory-to-reactive construction
//! (kept for demonstration; it is the one the lint warns about).

use super::node::BtNode;

/// Backchain one action: `post ? (pre → action)`. Ticking reads: check the
/// postcondition, succeed if satisfied; check the precondition, fail if
/// violated; otherwise do the task. The result is always in reactive
/// selection form, and chains compose by nesting in the prerequisite slot.
pub fn backchain(action: &str, pre: &str, post: &str) -> BtNode {
    backchain_step(post, BtNode::condition(pre), action)
}

/// One chaining step with an arbitrary prerequisite subtree: the previous
/// link of a chain goes where a plain precondition would.
pub fn backchain_step(goal: &str, prerequisite: BtNode, action: &str) -> BtNode {
    BtNode::fb(vec![
        BtNode::condition(goal),
        BtNode::seq(vec![prerequisite, BtNode::action(action)]),
    ])
}

/// A rewrite result with any warnings attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub node: BtNode,
    pub warnings: Vec<String>,
}

/// Replace `first →* second` with the reactive `(done ? first) → second`.
///
/// The output is in reactive selection form, but the construction is
/// tautological: `done` is an artificial flag meaning "first has
/// completed", so the tree runs `first` exactly when `first` has not run —
/// and nothing in the tree says how the flag is maintained or reset. The
/// warning flags that circularity; prefer keeping the memory sequence.
pub fn memory_to_reactive(done_cond: &str, first: &str, second: &str) -> Rewrite {
    let node = BtNode::seq(vec![
        BtNode::fb(vec![BtNode::condition(done_cond), BtNode::action(first)]),
        BtNode::action(second),
    ]);
    Rewrite {
        node,
        warnings: vec![format!(
            "circular condition: `{done_cond}` stands for \"`{first}` has completed\", so the \
             rewritten tree selects `{first}` if and only if `{first}` has not already run; the \
             tree does not define how `{done_cond}` is set or reset, which invites stale-flag bugs"
        )],
    }
}

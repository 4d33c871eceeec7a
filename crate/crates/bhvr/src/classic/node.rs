//! Tree description and its on-disk format.

use serde::{Deserialize, Serialize};

/// Per-tick status returned by every node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TickStatus {
    Success,
    Failure,
    Running,
}

/// A classical behavior-tree node.
///
/// The on-disk format is a tree of tagged records with fields
/// `{type, children, name, M, N}`:
///
/// ```json
/// {"type": "Sequence", "children": [
///   {"type": "Fallback", "children": [
///     {"type": "Condition", "name": "c1"},
///     {"type": "Action", "name": "a1"}]},
///   {"type": "Action", "name": "a2"}]}
/// ```
///
/// Decorators take exactly one child; `Parallel` carries its success
/// threshold `M`; `Repeat`/`RetryUntilSuccessful` carry a count `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum BtNode {
    Sequence { children: Vec<BtNode> },
    Fallback { children: Vec<BtNode> },
    SequenceMem { children: Vec<BtNode> },
    FallbackMem { children: Vec<BtNode> },
    Parallel {
        #[serde(rename = "M")]
        threshold: usize,
        children: Vec<BtNode>,
    },
    Inverter { children: Vec<BtNode> },
    Repeat {
        #[serde(rename = "N")]
        times: u32,
        children: Vec<BtNode>,
    },
    RetryUntilSuccessful {
        #[serde(rename = "N")]
        times: u32,
        children: Vec<BtNode>,
    },
    RunOnce { children: Vec<BtNode> },
    Action { name: String },
    Condition { name: String },
}

impl BtNode {
    pub fn seq(children: Vec<BtNode>) -> BtNode {
        BtNode::Sequence { children }
    }

    pub fn fb(children: Vec<BtNode>) -> BtNode {
        BtNode::Fallback { children }
    }

    pub fn seq_mem(children: Vec<BtNode>) -> BtNode {
        BtNode::SequenceMem { children }
    }

    pub fn fb_mem(children: Vec<BtNode>) -> BtNode {
        BtNode::FallbackMem { children }
    }

    pub fn parallel(threshold: usize, children: Vec<BtNode>) -> BtNode {
        BtNode::Parallel { threshold, children }
    }

    pub fn inverter(child: BtNode) -> BtNode {
        BtNode::Inverter { children: vec![child] }
    }

    pub fn repeat(times: u32, child: BtNode) -> BtNode {
        BtNode::Repeat { times, children: vec![child] }
    }

    pub fn retry(times: u32, child: BtNode) -> BtNode {
        BtNode::RetryUntilSuccessful { times, children: vec![child] }
    }

    pub fn run_once(child: BtNode) -> BtNode {
        BtNode::RunOnce { children: vec![child] }
    }

    pub fn action(name: impl Into<String>) -> BtNode {
        BtNode::Action { name: name.into() }
    }

    pub fn condition(name: impl Into<String>) -> BtNode {
        BtNode::Condition { name: name.into() }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            BtNode::Sequence { .. } => "Sequence",
            BtNode::Fallback { .. } => "Fallback",
            BtNode::SequenceMem { .. } => "SequenceMem",
            BtNode::FallbackMem { .. } => "FallbackMem",
            BtNode::Parallel { .. } => "Parallel",
            BtNode::Inverter { .. } => "Inverter",
            BtNode::Repeat { .. } => "Repeat",
            BtNode::RetryUntilSuccessful { .. } => "RetryUntilSuccessful",
            BtNode::RunOnce { .. } => "RunOnce",
            BtNode::Action { .. } => "Action",
            BtNode::Condition { .. } => "Condition",
        }
    }

    pub fn children(&self) -> &[BtNode] {
        match self {
            BtNode::Sequence { children }
            | BtNode::Fallback { children }
            | BtNode::SequenceMem { children }
            | BtNode::FallbackMem { children }
            | BtNode::Parallel { children, .. }
            | BtNode::Inverter { children }
            | BtNode::Repeat { children, .. }
            | BtNode::RetryUntilSuccessful { children, .. }
            | BtNode::RunOnce { children } => children,
            BtNode::Action { .. } | BtNode::Condition { .. } => &[],
        }
    }

    /// Structural well-formedness: thresholds in range, decorator arity,
    /// non-empty composites and leaf names.
    pub fn validate(&self) -> Result<(), NodeError> {
        self.validate_at("0")
    }

    fn validate_at(&self, path: &str) -> Result<(), NodeError> {
        let err = |message: String| {
            Err(NodeError {
                path: path.to_string(),
                message,
            })
        };
        match self {
            BtNode::Sequence { children }
            | BtNode::Fallback { children }
            | BtNode::SequenceMem { children }
            | BtNode::FallbackMem { children } => {
                if children.is_empty() {
                    return err(format!("{} needs at least one child", self.type_name()));
                }
            }
            BtNode::Parallel { threshold, children } => {
                if children.is_empty() {
                    return err("Parallel needs at least one child".into());
                }
                if *threshold < 1 || *threshold > children.len() {
                    return err(format!(
                        "Parallel threshold M={} out of range 1..={}",
                        threshold,
                        children.len()
                    ));
                }
            }
            BtNode::Inverter { children }
            | BtNode::Repeat { children, .. }
            | BtNode::RetryUntilSuccessful { children, .. }
            | BtNode::RunOnce { children } => {
                if children.len() != 1 {
                    return err(format!(
                        "{} takes exactly one child, found {}",
                        self.type_name(),
                        children.len()
                    ));
                }
            }
            BtNode::Action { name } | BtNode::Condition { name } => {
                if name.is_empty() {
                    return err("leaf name must be nonempty".into());
                }
            }
        }
        for (i, c) in self.children().iter().enumerate() {
            c.validate_at(&format!("{path}.{i}"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("invalid node at {path}: {message}")]
pub struct NodeError {
    pub path: String,
    pub message: String,
}

/// Parse and validate a tree description file.
pub fn load_bt(json: &str) -> Result<BtNode, String> {
    let node: BtNode = serde_json::from_str(json).map_err(|e| e.to_string())?;
    node.validate().map_err(|e| e.to_string())?;
    Ok(node)
}

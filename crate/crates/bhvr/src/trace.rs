//! Structured execution traces.
//!
//! Every observable event of a run — node starts, terminals, switches,
//! test readings and world changes — is recorded as one [`TraceEvent`].
//! Events are totally ordered by `(t, seq)`. Serialization is one JSON
//! record per line with a fixed field order, so identical runs produce
//! byte-identical trace files.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Ticks;

/// Node id used for events produced by world rules rather than by a node.
pub const WORLD_NODE: &str = "world";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    /// An execution node began running.
    Start,
    /// An execution node returned a success outcome.
    Complete,
    /// An execution node returned a failure outcome.
    Fail,
    /// An execution node was cancelled before returning.
    Cancel,
    /// A reactive combinator changed which child is live.
    Switch,
    /// The simulated world changed.
    World,
    /// A reactive combinator observed a test value.
    Test,
}

impl TraceKind {
    /// Terminal kinds are unique per execution node.
    pub fn is_terminal(self) -> bool {
        matches!(self, TraceKind::Complete | TraceKind::Fail | TraceKind::Cancel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: Ticks,
    pub seq: u64,
    pub kind: TraceKind,
    /// Hierarchical execution-node id, e.g. `0.2.1`. Child ids extend the
    /// parent id, so a prefix test identifies a subtree.
    pub node: String,
    pub name: String,
    pub detail: Value,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceLog {
    events: Vec<TraceEvent>,
}

impl TraceLog {
    pub fn push(
        &mut self,
        t: Ticks,
        kind: TraceKind,
        node: impl Into<String>,
        name: impl Into<String>,
        detail: Value,
    ) {
        let seq = self.events.len() as u64;
        self.events.push(TraceEvent {
            t,
            seq,
            kind,
            node: node.into(),
            name: name.into(),
            detail,
        });
    }

    /// Record a world change caused by a world rule or injection.
    pub fn world(&mut self, t: Ticks, name: impl Into<String>, detail: Value) {
        self.push(t, TraceKind::World, WORLD_NODE, name, detail);
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One JSON record per line, stable field order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for ev in &self.events {
            out.push_str(&serde_json::to_string(ev).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    /// The world-affecting events as `(t, name, detail)` triples, dropping
    /// node identity. Two programs are decision-equivalent when these match.
    pub fn world_signature(&self) -> Vec<(Ticks, String, Value)> {
        self.events
            .iter()
            .filter(|e| e.kind == TraceKind::World)
            .map(|e| (e.t, e.name.clone(), e.detail.clone()))
            .collect()
    }

    /// Number of `start` events whose name matches exactly.
    pub fn count_starts(&self, name: &str) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == TraceKind::Start && e.name == name)
            .count()
    }

    pub fn iter_kind(&self, kind: TraceKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Check that no cancelled subtree affected the world after its cancel
    /// event. World-rule events (node `world`) are exempt: they are not
    /// attributable to any behavior node.
    pub fn verify_cancellation_promptness(&self) -> Result<(), PromptnessViolation> {
        let cancels: Vec<(&str, Ticks)> = self
            .events
            .iter()
            .filter(|e| e.kind == TraceKind::Cancel)
            .map(|e| (e.node.as_str(), e.t))
            .collect();
        for ev in self.events.iter().filter(|e| e.kind == TraceKind::World) {
            if ev.node == WORLD_NODE {
                continue;
            }
            for (path, cancel_t) in &cancels {
                let in_subtree =
                    ev.node == *path || ev.node.starts_with(&format!("{path}."));
                if in_subtree && ev.t > *cancel_t {
                    return Err(PromptnessViolation {
                        cancelled_node: path.to_string(),
                        cancel_time: *cancel_t,
                        offending: Box::new(ev.clone()),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A world-affecting event observed after its subtree was cancelled.
#[derive(Debug, Clone, thiserror::Error)]
#[error(
    "node `{cancelled_node}` was cancelled at t={cancel_time} but `{}` affected the world at t={}",
    offending.node,
    offending.t
)]
pub struct PromptnessViolation {
    pub cancelled_node: String,
    pub cancel_time: Ticks,
    pub offending: Box<TraceEvent>,
}

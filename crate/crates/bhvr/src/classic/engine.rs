//! The tick engine.
//!
//! One call to [`Engine::tick`] propagates a tick from the root. Reactive
//! Sequence/Fallback tick children left to right within the tick, moving
//! past a child the moment it returns the pass-through status. The memory
//! variants advance their cursor when the remembered child finishes and
//! resume there on the next round, so a chain of timed actions completes
//! in exactly the sum of the durations. After each round, nodes that were
//! running but were not re-ticked are halted.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::behavior::Behavior;
use crate::outcome::{BehaviorError, ErrorKind, Outcome};

use super::node::{BtNode, TickStatus};

/// A leaf bound into the engine: a little state machine stepped once per
/// round it is ticked.
pub trait TickLeaf {
    fn tick(&mut self, round: u64) -> TickStatus;
    /// Reset any per-execution state; called when the leaf is halted.
    fn halt(&mut self) {}
}

pub type LeafFactory = Rc<dyn Fn() -> Box<dyn TickLeaf>>;

/// Name-to-leaf bindings. Each occurrence of a leaf name in the tree gets
/// its own instance from the factory.
#[derive(Clone, Default)]
pub struct Leaves {
    map: BTreeMap<String, LeafFactory>,
}

impl Leaves {
    pub fn new() -> Leaves {
        Leaves::default()
    }

    pub fn bind(
        mut self,
        name: impl Into<String>,
        factory: impl Fn() -> Box<dyn TickLeaf> + 'static,
    ) -> Leaves {
        self.map.insert(name.into(), Rc::new(factory));
        self
    }

    fn get(&self, name: &str) -> Option<&LeafFactory> {
        self.map.get(name)
    }
}

/// An action that runs for a fixed number of ticks, succeeds, and restarts
/// from scratch if ticked again afterwards.
pub fn timed_leaf(duration: u64) -> impl Fn() -> Box<dyn TickLeaf> {
    move || {
        Box::new(Timed {
            duration,
            elapsed: 0,
        })
    }
}

struct Timed {
    duration: u64,
    elapsed: u64,
}

impl TickLeaf for Timed {
    fn tick(&mut self, _round: u64) -> TickStatus {
        self.elapsed += 1;
        if self.elapsed >= self.duration {
            self.elapsed = 0;
            TickStatus::Success
        } else {
            TickStatus::Running
        }
    }

    fn halt(&mut self) {
        self.elapsed = 0;
    }
}

/// An action that never finishes. The selection oracle uses these so that
/// which leaf is ticked depends only on the conditions.
pub fn never_leaf() -> impl Fn() -> Box<dyn TickLeaf> {
    || Box::new(Never)
}

struct Never;

impl TickLeaf for Never {
    fn tick(&mut self, _round: u64) -> TickStatus {
        TickStatus::Running
    }
}

/// A leaf with a constant status.
pub fn const_leaf(status: TickStatus) -> impl Fn() -> Box<dyn TickLeaf> {
    move || Box::new(Const(status))
}

struct Const(TickStatus);

impl TickLeaf for Const {
    fn tick(&mut self, _round: u64) -> TickStatus {
        self.0
    }
}

/// A condition driven by a boolean series indexed by round (1-based); the
/// last value holds past the end. `true` reads as Success, `false` as
/// Failure — the classical conflation this engine exists to exhibit.
pub fn scripted_condition(series: Vec<bool>) -> impl Fn() -> Box<dyn TickLeaf> {
    let series = Rc::new(series);
    move || {
        Box::new(Scripted {
            series: series.clone(),
        })
    }
}

struct Scripted {
    series: Rc<Vec<bool>>,
}

impl TickLeaf for Scripted {
    fn tick(&mut self, round: u64) -> TickStatus {
        let idx = (round.max(1) - 1) as usize;
        let v = self
            .series
            .get(idx)
            .or(self.series.last())
            .copied()
            .unwrap_or(false);
        if v {
            TickStatus::Success
        } else {
            TickStatus::Failure
        }
    }
}

/// A tree plus the leaf bindings it needs to run.
#[derive(Clone)]
pub struct BtProgram {
    pub root: BtNode,
    pub leaves: Leaves,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("configuration error at {path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl BtProgram {
    pub fn new(root: BtNode, leaves: Leaves) -> BtProgram {
        BtProgram { root, leaves }
    }

    /// Instantiate an engine; fails if the tree is malformed or a leaf
    /// name does not resolve.
    pub fn build(&self) -> Result<Engine, ConfigError> {
        self.root.validate().map_err(|e| ConfigError {
            path: e.path,
            message: e.message,
        })?;
        let root = compile(&self.root, &self.leaves, "0")?;
        Ok(Engine {
            root,
            violation: None,
        })
    }
}

fn compile(node: &BtNode, leaves: &Leaves, path: &str) -> Result<ENode, ConfigError> {
    let kind = match node {
        BtNode::Sequence { .. } => EKind::Sequence,
        BtNode::Fallback { .. } => EKind::Fallback,
        BtNode::SequenceMem { .. } => EKind::SequenceMem { index: 0 },
        BtNode::FallbackMem { .. } => EKind::FallbackMem { index: 0 },
        BtNode::Parallel { threshold, .. } => EKind::Parallel {
            threshold: *threshold,
        },
        BtNode::Inverter { .. } => EKind::Inverter,
        BtNode::Repeat { times, .. } => EKind::Repeat {
            times: *times,
            count: 0,
        },
        BtNode::RetryUntilSuccessful { times, .. } => EKind::Retry {
            times: *times,
            count: 0,
        },
        BtNode::RunOnce { .. } => EKind::RunOnce { latched: None },
        BtNode::Action { name } | BtNode::Condition { name } => {
            let factory = leaves.get(name).ok_or_else(|| ConfigError {
                path: path.to_string(),
                message: format!("unresolved leaf `{name}`"),
            })?;
            let is_condition = matches!(node, BtNode::Condition { .. });
            EKind::Leaf {
                name: name.clone(),
                leaf: factory(),
                is_condition,
            }
        }
    };
    let children = node
        .children()
        .iter()
        .enumerate()
        .map(|(i, c)| compile(c, leaves, &format!("{path}.{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ENode {
        kind,
        children,
        path: path.to_string(),
        running: false,
        last_round: 0,
    })
}

enum EKind {
    Sequence,
    Fallback,
    SequenceMem { index: usize },
    FallbackMem { index: usize },
    Parallel { threshold: usize },
    Inverter,
    Repeat { times: u32, count: u32 },
    Retry { times: u32, count: u32 },
    RunOnce { latched: Option<TickStatus> },
    Leaf {
        name: String,
        leaf: Box<dyn TickLeaf>,
        is_condition: bool,
    },
}

struct ENode {
    kind: EKind,
    children: Vec<ENode>,
    path: String,
    running: bool,
    last_round: u64,
}

impl ENode {
    fn tick(&mut self, round: u64, rec: &mut TickRecord, err: &mut Option<ConfigError>) -> TickStatus {
        self.last_round = round;
        let status = match &mut self.kind {
            EKind::Sequence => {
                let mut status = TickStatus::Success;
                for c in self.children.iter_mut() {
                    match c.tick(round, rec, err) {
                        TickStatus::Success => continue,
                        other => {
                            status = other;
                            break;
                        }
                    }
                }
                status
            }
            EKind::Fallback => {
                let mut status = TickStatus::Failure;
                for c in self.children.iter_mut() {
                    match c.tick(round, rec, err) {
                        TickStatus::Failure => continue,
                        other => {
                            status = other;
                            break;
                        }
                    }
                }
                status
            }
            EKind::SequenceMem { index } => {
                match self.children[*index].tick(round, rec, err) {
                    TickStatus::Running => TickStatus::Running,
                    TickStatus::Failure => {
                        *index = 0;
                        TickStatus::Failure
                    }
                    TickStatus::Success => {
                        *index += 1;
                        if *index == self.children.len() {
                            *index = 0;
                            TickStatus::Success
                        } else {
                            TickStatus::Running
                        }
                    }
                }
            }
            EKind::FallbackMem { index } => {
                match self.children[*index].tick(round, rec, err) {
                    TickStatus::Running => TickStatus::Running,
                    TickStatus::Success => {
                        *index = 0;
                        TickStatus::Success
                    }
                    TickStatus::Failure => {
                        *index += 1;
                        if *index == self.children.len() {
                            *index = 0;
                            TickStatus::Failure
                        } else {
                            TickStatus::Running
                        }
                    }
                }
            }
            EKind::Parallel { threshold } => {
                let m = *threshold;
                let n = self.children.len();
                let mut succeeded = 0;
                let mut failed = 0;
                for c in self.children.iter_mut() {
                    match c.tick(round, rec, err) {
                        TickStatus::Success => succeeded += 1,
                        TickStatus::Failure => failed += 1,
                        TickStatus::Running => {}
                    }
                }
                if succeeded >= m {
                    TickStatus::Success
                } else if failed + m > n {
                    // the N - M + 1 failure threshold
                    TickStatus::Failure
                } else {
                    TickStatus::Running
                }
            }
            EKind::Inverter => match self.children[0].tick(round, rec, err) {
                TickStatus::Success => TickStatus::Failure,
                TickStatus::Failure => TickStatus::Success,
                TickStatus::Running => TickStatus::Running,
            },
            EKind::Repeat { times, count } => {
                if *times == 0 {
                    TickStatus::Success
                } else {
                    match self.children[0].tick(round, rec, err) {
                        TickStatus::Running => TickStatus::Running,
                        TickStatus::Failure => {
                            *count = 0;
                            TickStatus::Failure
                        }
                        TickStatus::Success => {
                            *count += 1;
                            if *count >= *times {
                                *count = 0;
                                TickStatus::Success
                            } else {
                                TickStatus::Running
                            }
                        }
                    }
                }
            }
            EKind::Retry { times, count } => {
                if *times == 0 {
                    TickStatus::Failure
                } else {
                    match self.children[0].tick(round, rec, err) {
                        TickStatus::Running => TickStatus::Running,
                        TickStatus::Success => {
                            *count = 0;
                            TickStatus::Success
                        }
                        TickStatus::Failure => {
                            *count += 1;
                            if *count >= *times {
                                *count = 0;
                                TickStatus::Failure
                            } else {
                                TickStatus::Running
                            }
                        }
                    }
                }
            }
            EKind::RunOnce { latched } => {
                if let Some(s) = latched {
                    *s
                } else {
                    let s = self.children[0].tick(round, rec, err);
                    if s != TickStatus::Running {
                        *latched = Some(s);
                    }
                    s
                }
            }
            EKind::Leaf {
                name,
                leaf,
                is_condition,
            } => {
                let s = leaf.tick(round);
                if *is_condition {
                    if s == TickStatus::Running && err.is_none() {
                        *err = Some(ConfigError {
                            path: self.path.clone(),
                            message: format!(
                                "condition `{name}` returned Running; conditions must finish within the tick"
                            ),
                        });
                    }
                } else {
                    rec.ticked_actions.push(name.clone());
                }
                s
            }
        };
        self.running = status == TickStatus::Running;
        status
    }

    /// Halt nodes that were running but were not re-ticked this round.
    fn halt_stale(&mut self, round: u64) {
        if self.running && self.last_round != round {
            self.halt();
        } else {
            for c in self.children.iter_mut() {
                c.halt_stale(round);
            }
        }
    }

    fn halt(&mut self) {
        self.running = false;
        match &mut self.kind {
            EKind::SequenceMem { index } | EKind::FallbackMem { index } => *index = 0,
            EKind::Repeat { count, .. } | EKind::Retry { count, .. } => *count = 0,
            EKind::Leaf { leaf, .. } => leaf.halt(),
            // RunOnce keeps its latch: the child already finished.
            _ => {}
        }
        for c in self.children.iter_mut() {
            c.halt();
        }
    }
}

/// What one round did: the root status plus which action leaves got ticked.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TickRecord {
    pub round: u64,
    pub status: TickStatus,
    pub ticked_actions: Vec<String>,
}

/// Outcome of [`Engine::run_ticked`].
#[derive(Debug, Clone, PartialEq)]
pub enum TickedEnd {
    /// The root returned a terminal status at the given round.
    Terminal(TickStatus, u64),
    /// The round budget ran out with the root still running.
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct TickedRun {
    pub end: TickedEnd,
    /// Per-round records, in order; doubles as the engine's trace log.
    pub rounds: Vec<TickRecord>,
}

impl TickedRun {
    pub fn history(&self) -> Vec<TickStatus> {
        self.rounds.iter().map(|r| r.status).collect()
    }

    /// The action leaf ticked at a given 1-based round, when exactly one was.
    pub fn decision(&self, round: u64) -> Option<&str> {
        let rec = self.rounds.get((round - 1) as usize)?;
        match rec.ticked_actions.as_slice() {
            [one] => Some(one),
            _ => None,
        }
    }
}

pub struct Engine {
    root: ENode,
    violation: Option<ConfigError>,
}

impl Engine {
    /// Propagate one tick from the root. Rounds are 1-based.
    pub fn tick(&mut self, round: u64) -> Result<TickRecord, ConfigError> {
        if let Some(v) = &self.violation {
            return Err(v.clone());
        }
        let mut rec = TickRecord {
            round,
            status: TickStatus::Running,
            ticked_actions: Vec::new(),
        };
        let mut err = None;
        rec.status = self.root.tick(round, &mut rec, &mut err);
        self.root.halt_stale(round);
        if let Some(e) = err {
            self.violation = Some(e.clone());
            return Err(e);
        }
        Ok(rec)
    }

    /// Tick from the root every round until the root returns a terminal
    /// status or the budget is exhausted.
    pub fn run_ticked(&mut self, max_rounds: u64) -> Result<TickedRun, ConfigError> {
        let mut rounds = Vec::new();
        for round in 1..=max_rounds {
            let rec = self.tick(round)?;
            let status = rec.status;
            rounds.push(rec);
            if status != TickStatus::Running {
                return Ok(TickedRun {
                    end: TickedEnd::Terminal(status, round),
                    rounds,
                });
            }
        }
        Ok(TickedRun {
            end: TickedEnd::BudgetExhausted,
            rounds,
        })
    }
}

/// Bridge a classical program onto the behavior runtime: one engine round
/// per virtual tick, completing with the root's terminal status.
pub fn engine_behavior(program: BtProgram) -> Behavior<TickStatus> {
    let program = Rc::new(program);
    Behavior::from_fn("btEngine", true, move |ctx| {
        let program = program.clone();
        Box::pin(async move {
            let mut engine = match program.build() {
                Ok(e) => e,
                Err(e) => {
                    return Outcome::Failure(BehaviorError::new(
                        ErrorKind::ActionFailed,
                        "btEngine",
                        e.to_string(),
                        ctx.now(),
                    ))
                }
            };
            let mut round = 0;
            loop {
                ctx.sleep(1).await;
                round += 1;
                match engine.tick(round) {
                    Ok(rec) if rec.status == TickStatus::Running => continue,
                    Ok(rec) => return Outcome::Success(rec.status),
                    Err(e) => {
                        return Outcome::Failure(BehaviorError::new(
                            ErrorKind::ActionFailed,
                            "btEngine",
                            e.to_string(),
                            ctx.now(),
                        ))
                    }
                }
            }
        })
    })
}

//! `bhvr` — run behavior scenarios against the simulated world, translate
//! classical behavior trees into reactive-selection programs, and check
//! trees for reactive selection form.
//!
//! Exit codes for `run`: 0 success, 1 behavior failure, 2 tick budget
//! exhausted, 3 configuration error. `translate` additionally uses 4 for
//! trees that are not in reactive selection form.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use bhvr::classic::{lint_progress_hazards, load_bt, reactive_selection_form, to_r_select, FormVerdict};
use bhvr::combinators::switches;
use bhvr::dsl::Val;
use bhvr::sim::scenario::Scenario;
use bhvr::trace::{TraceKind, TraceLog};
use bhvr::{BehaviorError, Outcome, RunReport, RunResult, Ticks};

#[derive(Parser)]
#[command(
    name = "bhvr",
    about = "Behavior scenario runner and classical-tree analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file; print a summary record and optionally write
    /// the trace as JSON lines.
    Run {
        /// Scenario TOML file.
        #[arg(long)]
        scenario: PathBuf,
        /// Where to write the trace (one JSON record per line).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Override the scenario's tick budget.
        #[arg(long)]
        max_ticks: Option<Ticks>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the test poll period.
        #[arg(long)]
        poll: Option<Ticks>,
    },
    /// Translate a reactive-selection-form tree file into an rSelect
    /// program.
    Translate {
        /// Tree description file (JSON).
        #[arg(long)]
        bt: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report whether a tree file is in reactive selection form, plus any
    /// progress-problem hazards.
    CheckForm {
        /// Tree description file (JSON).
        #[arg(long)]
        bt: PathBuf,
    },
}

/// Write to stdout, exiting quietly if the reader has gone away (for
/// example when piped into `head`).
fn emit(text: std::fmt::Arguments) {
    use std::io::Write;
    if std::io::stdout().write_fmt(text).is_err() {
        std::process::exit(0);
    }
}

macro_rules! say {
    ($($arg:tt)*) => { emit(format_args!("{}
", format_args!($($arg)*))) };
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run {
            scenario,
            trace,
            max_ticks,
            seed,
            poll,
        } => cmd_run(scenario, trace, max_ticks, seed, poll),
        Cmd::Translate { bt, out } => cmd_translate(bt, out),
        Cmd::CheckForm { bt } => cmd_check_form(bt),
    };
    std::process::exit(code);
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunSummary {
    outcome: OutcomeSummary,
    total_ticks: Ticks,
    switch_counts: BTreeMap<String, u64>,
    action_invocation_counts: BTreeMap<String, u64>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
enum OutcomeSummary {
    Success { value: String },
    Failure { error: BehaviorError },
    BudgetExhausted { at: Ticks },
}

/// Labels of structural nodes; everything else that starts is counted as
/// an action invocation.
const STRUCTURAL: [&str; 10] = [
    "bind", "then", "fallback", "parallel", "both", "rSelect", "monitor", "pure", "throw",
    "defer",
];

fn summarize(report: &RunReport<Val>) -> RunSummary {
    let outcome = match &report.result {
        RunResult::Done(Outcome::Success(v)) => OutcomeSummary::Success {
            value: v.to_string(),
        },
        RunResult::Done(Outcome::Failure(e)) => OutcomeSummary::Failure { error: e.clone() },
        RunResult::BudgetExhausted { at } => OutcomeSummary::BudgetExhausted { at: *at },
    };
    RunSummary {
        outcome,
        total_ticks: report.end_time(),
        switch_counts: switch_counts(&report.trace),
        action_invocation_counts: action_counts(&report.trace),
    }
}

fn switch_counts(trace: &TraceLog) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for sw in switches(trace) {
        *counts.entry(sw.node).or_default() += 1;
    }
    counts
}

fn action_counts(trace: &TraceLog) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for ev in trace.iter_kind(TraceKind::Start) {
        if STRUCTURAL.contains(&ev.name.as_str()) || ev.name.starts_with("map(") {
            continue;
        }
        *counts.entry(ev.name.clone()).or_default() += 1;
    }
    counts
}

fn cmd_run(
    scenario_path: PathBuf,
    trace_path: Option<PathBuf>,
    max_ticks: Option<Ticks>,
    seed: Option<u64>,
    poll: Option<Ticks>,
) -> i32 {
    let mut scenario = match Scenario::load(&scenario_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 3;
        }
    };
    if let Some(n) = max_ticks {
        scenario.exec.max_ticks = n;
    }
    if let Some(s) = seed {
        scenario.exec.seed = s;
    }
    if let Some(p) = poll {
        scenario.exec.test_poll_period = p;
    }
    let (report, _sim) = match scenario.run() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return 3;
        }
    };
    if let Some(path) = trace_path {
        if let Err(e) = std::fs::write(&path, report.trace.to_jsonl()) {
            eprintln!("cannot write trace to {}: {e}", path.display());
            return 3;
        }
    }
    let summary = summarize(&report);
    say!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    match report.result {
        RunResult::Done(Outcome::Success(_)) => 0,
        RunResult::Done(Outcome::Failure(_)) => 1,
        RunResult::BudgetExhausted { .. } => 2,
    }
}

fn cmd_translate(bt_path: PathBuf, out: Option<PathBuf>) -> i32 {
    let node = match read_tree(&bt_path) {
        Ok(n) => n,
        Err(code) => return code,
    };
    match to_r_select(&node) {
        Ok(program) => {
            let text = program.to_dsl_program();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return 3;
                    }
                }
                None => emit(format_args!("{text}")),
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            4
        }
    }
}

fn cmd_check_form(bt_path: PathBuf) -> i32 {
    let node = match read_tree(&bt_path) {
        Ok(n) => n,
        Err(code) => return code,
    };
    match reactive_selection_form(&node) {
        FormVerdict::InForm => say!("in reactive selection form"),
        FormVerdict::NotInForm { path, reason } => {
            say!("not in reactive selection form: at {path}: {reason}")
        }
        FormVerdict::NotApplicable { path, node_type } => {
            say!("not applicable: {node_type} at {path} is outside the core vocabulary")
        }
    }
    let findings = lint_progress_hazards(&node);
    if findings.is_empty() {
        say!("no progress-problem hazards");
    } else {
        for f in findings {
            say!("hazard at {}: {}", f.path, f.message);
        }
    }
    0
}

fn read_tree(path: &PathBuf) -> Result<bhvr::classic::BtNode, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return Err(3);
        }
    };
    match load_bt(&text) {
        Ok(node) => Ok(node),
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            Err(3)
        }
    }
}

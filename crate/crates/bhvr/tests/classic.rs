//! Tick-engine semantics, form recognition, translation and rewrites.

use bhvr::behavior::run_plain;
use bhvr::classic::{
    backchain, backchain_step, const_leaf, engine_behavior, lint_progress_hazards, load_bt,
    memory_to_reactive, never_leaf, reactive_selection_form, scripted_condition, timed_leaf,
    to_r_select, BtNode, BtProgram, FormVerdict, Leaves, RsfProgram, TickStatus, TickedEnd,
};
use bhvr::ExecConfig;

fn timed_two_action_sequence(mem: bool) -> BtProgram {
    let children = vec![BtNode::action("action1"), BtNode::action("action2")];
    let root = if mem {
        BtNode::seq_mem(children)
    } else {
        BtNode::seq(children)
    };
    let leaves = Leaves::new()
        .bind("action1", timed_leaf(3))
        .bind("action2", timed_leaf(3));
    BtProgram::new(root, leaves)
}

// ------------------------------------------------------------------- tick

#[test]
fn sequence_ticks_next_child_after_success() {
    let root = BtNode::seq(vec![BtNode::condition("c"), BtNode::action("a")]);
    let leaves = Leaves::new()
        .bind("c", const_leaf(TickStatus::Success))
        .bind("a", never_leaf());
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    let rec = engine.tick(1).unwrap();
    assert_eq!(rec.status, TickStatus::Running);
    assert_eq!(rec.ticked_actions, vec!["a"], "second child ticked in the same round");
}

#[test]
fn fallback_fails_when_all_children_fail() {
    let root = BtNode::fb(vec![BtNode::condition("c1"), BtNode::condition("c2")]);
    let leaves = Leaves::new()
        .bind("c1", const_leaf(TickStatus::Failure))
        .bind("c2", const_leaf(TickStatus::Failure));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    assert_eq!(engine.tick(1).unwrap().status, TickStatus::Failure);
}

#[test]
fn parallel_reaches_success_threshold() {
    let root = BtNode::parallel(
        2,
        vec![
            BtNode::condition("s1"),
            BtNode::condition("s2"),
            BtNode::action("r"),
        ],
    );
    let leaves = Leaves::new()
        .bind("s1", const_leaf(TickStatus::Success))
        .bind("s2", const_leaf(TickStatus::Success))
        .bind("r", never_leaf());
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    assert_eq!(engine.tick(1).unwrap().status, TickStatus::Success);
}

#[test]
#[allow(clippy::int_plus_one)] // the oracle spells the threshold rule literally
fn parallel_matches_brute_force_threshold_rule() {
    // Exhaustively compare the Parallel node against the threshold rule
    // for every status assignment to up to 4 children.
    let statuses = [TickStatus::Success, TickStatus::Failure, TickStatus::Running];
    for n in 1..=4usize {
        for m in 1..=n {
            let mut assignment = vec![0usize; n];
            loop {
                let children: Vec<BtNode> = (0..n)
                    .map(|i| BtNode::action(format!("x{i}")))
                    .collect();
                let mut leaves = Leaves::new();
                for (i, &si) in assignment.iter().enumerate() {
                    leaves = leaves.bind(format!("x{i}"), const_leaf(statuses[si]));
                }
                let mut engine = BtProgram::new(BtNode::parallel(m, children), leaves)
                    .build()
                    .unwrap();
                let got = engine.tick(1).unwrap().status;

                let succ = assignment
                    .iter()
                    .filter(|&&s| statuses[s] == TickStatus::Success)
                    .count();
                let fail = assignment
                    .iter()
                    .filter(|&&s| statuses[s] == TickStatus::Failure)
                    .count();
                let expected = if succ >= m {
                    TickStatus::Success
                } else if fail >= n - m + 1 {
                    TickStatus::Failure
                } else {
                    TickStatus::Running
                };
                assert_eq!(got, expected, "n={n} m={m} assignment={assignment:?}");

                // Next assignment in base 3.
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    assignment[i] += 1;
                    if assignment[i] < 3 {
                        break;
                    }
                    assignment[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
}

#[test]
fn decorators_follow_their_policies() {
    // Inverter flips terminal statuses.
    let root = BtNode::inverter(BtNode::condition("c"));
    let leaves = Leaves::new().bind("c", const_leaf(TickStatus::Success));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    assert_eq!(engine.tick(1).unwrap().status, TickStatus::Failure);

    // Repeat(2) needs two successes.
    let root = BtNode::repeat(2, BtNode::action("a"));
    let leaves = Leaves::new().bind("a", timed_leaf(1));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    assert_eq!(engine.tick(1).unwrap().status, TickStatus::Running);
    assert_eq!(engine.tick(2).unwrap().status, TickStatus::Success);

    // RetryUntilSuccessful(3) gives up after three failures.
    let root = BtNode::retry(3, BtNode::condition("c"));
    let leaves = Leaves::new().bind("c", const_leaf(TickStatus::Failure));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    assert_eq!(engine.tick(1).unwrap().status, TickStatus::Running);
    assert_eq!(engine.tick(2).unwrap().status, TickStatus::Running);
    assert_eq!(engine.tick(3).unwrap().status, TickStatus::Failure);

    // RunOnce latches the child's first terminal status.
    let root = BtNode::run_once(BtNode::action("a"));
    let leaves = Leaves::new().bind("a", timed_leaf(2));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    assert_eq!(engine.tick(1).unwrap().status, TickStatus::Running);
    let rec = engine.tick(2).unwrap();
    assert_eq!(rec.status, TickStatus::Success);
    assert_eq!(rec.ticked_actions, vec!["a"]);
    let rec = engine.tick(3).unwrap();
    assert_eq!(rec.status, TickStatus::Success);
    assert!(rec.ticked_actions.is_empty(), "latched child not re-ticked");
}

#[test]
fn condition_returning_running_is_a_configuration_error() {
    let root = BtNode::condition("slow");
    let leaves = Leaves::new().bind("slow", timed_leaf(3));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    let err = engine.tick(1).unwrap_err();
    assert!(err.message.contains("slow"));
}

#[test]
fn unresolved_leaf_is_a_configuration_error() {
    let program = BtProgram::new(BtNode::action("ghost"), Leaves::new());
    assert!(program.build().is_err());
}

// -------------------------------------------------------------- run_ticked

#[test]
fn single_true_condition_succeeds_at_round_one() {
    let program = BtProgram::new(
        BtNode::condition("c"),
        Leaves::new().bind("c", scripted_condition(vec![true])),
    );
    let run = program.build().unwrap().run_ticked(10).unwrap();
    assert_eq!(run.end, TickedEnd::Terminal(TickStatus::Success, 1));
}

#[test]
fn reactive_sequence_of_two_timed_actions_never_progresses() {
    // After action1 completes, the next round restarts it and halts
    // action2, forever.
    let mut engine = timed_two_action_sequence(false).build().unwrap();
    let run = engine.run_ticked(10_000).unwrap();
    assert_eq!(run.end, TickedEnd::BudgetExhausted);
    assert!(run.history().iter().all(|s| *s == TickStatus::Running));
}

#[test]
fn memory_sequence_completes_in_sum_of_durations() {
    let mut engine = timed_two_action_sequence(true).build().unwrap();
    let run = engine.run_ticked(100).unwrap();
    assert_eq!(run.end, TickedEnd::Terminal(TickStatus::Success, 6));
}

#[test]
fn unticked_running_nodes_are_halted() {
    // Fallback[c, a]: while c fails, a runs; when c succeeds, a is no
    // longer ticked and must be halted, so re-entering restarts it.
    let root = BtNode::fb(vec![BtNode::condition("c"), BtNode::action("a")]);
    let series = vec![false, false, true, false, false, false];
    let leaves = Leaves::new()
        .bind("c", scripted_condition(series))
        .bind("a", timed_leaf(3));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    // Rounds 1-2: a accrues 2 ticks. Round 3: c succeeds, a halted.
    // Rounds 4-6: a restarts from zero and needs all 3 ticks again.
    for round in 1..=5 {
        let rec = engine.tick(round).unwrap();
        assert_eq!(rec.status, if round == 3 { TickStatus::Success } else { TickStatus::Running });
    }
    assert_eq!(engine.tick(6).unwrap().status, TickStatus::Success);
}

#[test]
fn memory_resets_after_terminal_status() {
    // SequenceMem over [cond, action]: first pass fails at the condition,
    // then succeeds from the start once the condition holds.
    let root = BtNode::seq_mem(vec![BtNode::condition("c"), BtNode::action("a")]);
    let leaves = Leaves::new()
        .bind("c", scripted_condition(vec![false, true, true]))
        .bind("a", timed_leaf(1));
    let mut engine = BtProgram::new(root, leaves).build().unwrap();
    assert_eq!(engine.tick(1).unwrap().status, TickStatus::Failure);
    assert_eq!(engine.tick(2).unwrap().status, TickStatus::Running);
    assert_eq!(engine.tick(3).unwrap().status, TickStatus::Success);
}

#[test]
fn oracle_bridge_reports_budget_exhaustion() {
    let b = engine_behavior(timed_two_action_sequence(false));
    let report = run_plain(
        &b,
        ExecConfig {
            max_ticks: 1_000,
            ..ExecConfig::default()
        },
    );
    assert!(report.result.is_budget_exhausted());

    let b = engine_behavior(timed_two_action_sequence(true));
    let report = run_plain(
        &b,
        ExecConfig {
            max_ticks: 1_000,
            ..ExecConfig::default()
        },
    );
    let outcome = report.result.expect_done().clone();
    assert_eq!(outcome.unwrap_success(), TickStatus::Success);
}

// ------------------------------------------------------------------- form

fn nested_selection_tree() -> BtNode {
    // (c1 ? ((c2 ? a1) -> a2)) -> ((c3 ? a4) -> a5)
    BtNode::seq(vec![
        BtNode::fb(vec![
            BtNode::condition("c1"),
            BtNode::seq(vec![
                BtNode::fb(vec![BtNode::condition("c2"), BtNode::action("a1")]),
                BtNode::action("a2"),
            ]),
        ]),
        BtNode::seq(vec![
            BtNode::fb(vec![BtNode::condition("c3"), BtNode::action("a4")]),
            BtNode::action("a5"),
        ]),
    ])
}

#[test]
fn nested_selection_tree_is_in_form() {
    assert!(reactive_selection_form(&nested_selection_tree()).is_in_form());
}

#[test]
fn two_actions_in_sequence_are_not_in_form() {
    let tree = BtNode::seq(vec![BtNode::action("a1"), BtNode::action("a2")]);
    match reactive_selection_form(&tree) {
        FormVerdict::NotInForm { path, .. } => assert_eq!(path, "0.0"),
        other => panic!("expected NotInForm, got {other:?}"),
    }
}

#[test]
fn degenerate_leaf_is_in_form() {
    assert!(reactive_selection_form(&BtNode::action("a")).is_in_form());
}

#[test]
fn non_core_nodes_are_not_applicable() {
    let tree = BtNode::seq_mem(vec![BtNode::action("a"), BtNode::action("b")]);
    match reactive_selection_form(&tree) {
        FormVerdict::NotApplicable { node_type, .. } => assert_eq!(node_type, "SequenceMem"),
        other => panic!("expected NotApplicable, got {other:?}"),
    }
}

#[test]
fn progress_hazard_lint_flags_action_chains_but_not_selection_form() {
    // open -> passThrough -> close as a reactive sequence.
    let tree = BtNode::seq(vec![
        BtNode::action("open"),
        BtNode::action("passThrough"),
        BtNode::action("close"),
    ]);
    let findings = lint_progress_hazards(&tree);
    assert_eq!(findings.len(), 2, "both non-final actions are hazards");

    assert!(lint_progress_hazards(&nested_selection_tree()).is_empty());
    let chained = backchain("open", "doorReachable", "doorOpen");
    assert!(lint_progress_hazards(&chained).is_empty());
}

// -------------------------------------------------------------- translate

#[test]
fn nested_selection_translates_outside_in() {
    let program = to_r_select(&nested_selection_tree()).unwrap();
    assert_eq!(
        program.to_dsl_expr(),
        "rSelect(c1, rSelect(c3, a5, a4), rSelect(c2, a2, a1))"
    );
}

#[test]
fn guarded_action_pair_translates_with_branches_swapped() {
    // (c ? a1) -> a2 becomes rSelect(c, a2, a1).
    let tree = BtNode::seq(vec![
        BtNode::fb(vec![BtNode::condition("c"), BtNode::action("a1")]),
        BtNode::action("a2"),
    ]);
    assert_eq!(
        to_r_select(&tree).unwrap().to_dsl_expr(),
        "rSelect(c, a2, a1)"
    );
}

#[test]
fn single_action_translates_to_bare_call() {
    assert_eq!(
        to_r_select(&BtNode::action("a")).unwrap(),
        RsfProgram::Leaf("a".to_string())
    );
}

#[test]
fn out_of_form_trees_name_the_offending_subtree() {
    let tree = BtNode::seq(vec![BtNode::action("a1"), BtNode::action("a2")]);
    let err = to_r_select(&tree).unwrap_err();
    assert_eq!(err.path, "0.0");
}

// --------------------------------------------------------------- rewrites

#[test]
fn backchain_produces_post_guarding_pre_and_action() {
    let tree = backchain("open", "doorReachable", "doorOpen");
    assert_eq!(
        tree,
        BtNode::fb(vec![
            BtNode::condition("doorOpen"),
            BtNode::seq(vec![
                BtNode::condition("doorReachable"),
                BtNode::action("open"),
            ]),
        ])
    );
    assert!(reactive_selection_form(&tree).is_in_form());
}

#[test]
fn chained_backchain_reproduces_the_door_subtree() {
    // (insideRoom & doorClosed) ?
    //   ((insideRoom ? ((doorClosed ? open) -> passThrough)) -> close)
    let inner = backchain_step("doorClosed", BtNode::condition("doorOpen"), "open");
    // The innermost link guards `open` by its own goal; the subsequent
    // links nest the previous link in the prerequisite slot.
    let mid = backchain_step("insideRoom", inner.clone(), "passThrough");
    let outer = backchain_step("insideRoomAndDoorClosed", mid.clone(), "close");

    assert!(reactive_selection_form(&outer).is_in_form());
    match &outer {
        BtNode::Fallback { children } => {
            assert_eq!(children[0], BtNode::condition("insideRoomAndDoorClosed"));
            match &children[1] {
                BtNode::Sequence { children } => {
                    assert_eq!(children[0], mid);
                    assert_eq!(children[1], BtNode::action("close"));
                }
                other => panic!("unexpected shape {other:?}"),
            }
        }
        other => panic!("unexpected shape {other:?}"),
    }
}

#[test]
fn backchained_trees_are_always_in_form() {
    // Chains of arbitrary depth over arbitrary leaf names stay in form.
    for depth in 1..=6 {
        let mut tree = backchain("act0", "pre0", "post0");
        for i in 1..depth {
            tree = backchain_step(&format!("post{i}"), tree, &format!("act{i}"));
        }
        assert!(
            reactive_selection_form(&tree).is_in_form(),
            "depth {depth} chain left form"
        );
        assert!(to_r_select(&tree).is_ok());
    }
}

#[test]
fn memory_to_reactive_is_in_form_but_warned_circular() {
    let rewrite = memory_to_reactive("reachedPoint1", "moveTo1", "moveTo2");
    assert_eq!(
        rewrite.node,
        BtNode::seq(vec![
            BtNode::fb(vec![
                BtNode::condition("reachedPoint1"),
                BtNode::action("moveTo1"),
            ]),
            BtNode::action("moveTo2"),
        ])
    );
    assert!(reactive_selection_form(&rewrite.node).is_in_form());
    assert_eq!(rewrite.warnings.len(), 1);
    assert!(rewrite.warnings[0].contains("circular"));
}

// ------------------------------------------------------------ file format

#[test]
fn bt_files_load_and_validate() {
    let json = r#"
    {"type": "Sequence", "children": [
        {"type": "Fallback", "children": [
            {"type": "Condition", "name": "c1"},
            {"type": "Action", "name": "a1"}]},
        {"type": "Action", "name": "a2"}]}
    "#;
    let tree = load_bt(json).unwrap();
    assert!(reactive_selection_form(&tree).is_in_form());

    let bad = r#"{"type": "Parallel", "M": 5, "children": [{"type": "Action", "name": "a"}]}"#;
    let err = load_bt(bad).unwrap_err();
    assert!(err.contains("threshold"));

    let round_trip = serde_json::to_string(&tree).unwrap();
    assert_eq!(load_bt(&round_trip).unwrap(), tree);
}

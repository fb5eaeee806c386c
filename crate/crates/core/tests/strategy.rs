use std::collections::{BTreeMap, BTreeSet};

use tutor_core::logic::{parse_formula, ArityTable, Sequent};
use tutor_core::rules::{apply, Direction, Fresh};
use tutor_core::strategy::{
    parse_strategies, run_strategy, EdgeLabel, HierarchicalProofPlan, Level, StrategyError, StrategyExpr,
};
use tutor_core::theory::{parse_theory, Theory};

fn relations() -> Theory {
    parse_theory(include_str!("../data/relations.thy")).unwrap()
}

fn task(label: &str, goal: &str) -> Sequent {
    Sequent::new(label, parse_formula(goal, &ArityTable::default()).unwrap())
}

fn t1() -> Sequent {
    task("T1", "inv(comp(R,S)) subset comp(inv(S),inv(R))")
}

fn t2() -> Sequent {
    task("T2", "inv(comp(R,S)) supset comp(inv(S),inv(R))")
}

fn plan_for(s: &Sequent) -> HierarchicalProofPlan {
    let out = run_strategy("close-by-definition", s, &relations(), 5000);
    assert!(!out.exhausted);
    out.plan.expect("close-by-definition finds a plan")
}

#[test]
fn dsl_parses_and_prints() {
    let table = parse_strategies(
        "strategy a\n  repeat use select * from definitions as backward\nstrategy b\n  try a then first deepaxiom, or-l\n",
    )
    .unwrap();
    assert_eq!(table.len(), 2);
    assert_eq!(table.get("a").unwrap().to_string(), "repeat use select * from definitions as backward");
    assert_eq!(table.get("b").unwrap().to_string(), "try a then first deepaxiom, or-l");
    let again = parse_strategies(&format!("strategy b\n  {}\nstrategy a\n  {}", table.get("b").unwrap(), table.get("a").unwrap()))
        .unwrap();
    assert_eq!(again.get("b"), table.get("b"));
    assert!(matches!(table.get("b"), Some(StrategyExpr::Seq(..))));
}

#[test]
fn dsl_errors() {
    assert!(matches!(parse_strategies("strategy a\n  b"), Err(StrategyError::Unknown { .. })));
    assert!(matches!(
        parse_strategies("strategy a\n  deepaxiom\nstrategy a\n  or-l"),
        Err(StrategyError::Duplicate { .. })
    ));
    assert!(matches!(parse_strategies("strategy a\n  try a"), Err(StrategyError::Cycle(_))));
    assert!(parse_strategies("strategy a\n  use select * from lemmas as backward").is_err());
}

#[test]
fn plan_hierarchy_for_the_subset_task() {
    let plan = plan_for(&t1());
    assert!(plan.is_closed());
    assert_eq!(plan.top.len(), 1);
    let top = plan.edge(plan.top[0]);
    assert_eq!(top.label.name(), "close-by-definition");
    let children: Vec<&str> = top.children.iter().map(|&c| plan.edge(c).label.name()).collect();
    assert_eq!(children, ["work-backward", "work-forward", "close-by-logic"]);

    let wb = plan.edge(top.children[0]);
    let first = plan.edge(wb.children[0]);
    assert_eq!(first.label.name(), "Def-subset-bwd");
    assert_eq!(plan.node(first.source).sequent.label, "T1");
    assert_eq!(first.targets.len(), 1);
}

#[test]
fn flattening_at_the_strategy_level_gives_a_three_edge_chain() {
    let plan = plan_for(&t1());
    let flat = plan.flatten_at_level(&Level::Depth(1)).unwrap();
    let labels: Vec<&str> = flat.edges.iter().map(|e| e.label.as_str()).collect();
    assert_eq!(labels, ["work-backward", "work-forward", "close-by-logic"]);
    let chain = flat.chain_from(plan.root);
    assert_eq!(chain.len(), 3);
    assert!(flat.edges.last().unwrap().targets.is_empty());

    let top = plan.flatten_at_level(&Level::Depth(0)).unwrap();
    assert_eq!(top.edges.len(), 1);
    assert!(plan.flatten_at_level(&Level::Depth(9)).is_err());
    let named = plan.flatten_at_level(&Level::Names(BTreeSet::from(["work-forward".to_string()]))).unwrap();
    assert!(named.edges.iter().any(|e| e.label == "work-forward"));
    assert!(named.edges.iter().any(|e| e.label == "Def-subset-bwd"));
}

/// Re-applies the flattened inferences from the root and checks every
/// produced task against the plan.
fn replay(plan: &HierarchicalProofPlan) -> Vec<String> {
    let flat = plan.flatten_at_level(&Level::Full).unwrap();
    let root = plan.root_sequent().clone();
    let mut fresh = Fresh::for_sequents([&root]);
    let mut live: BTreeMap<usize, Sequent> = BTreeMap::from([(plan.root, root)]);
    let mut used = Vec::new();
    for e in &flat.edges {
        let EdgeLabel::Inference(app) = &plan.edge(e.edge).label else { panic!("strategy edge in full flattening") };
        let source = live.remove(&e.source).expect("source task is open");
        let (produced, _) = apply(app, &source, &mut fresh).unwrap();
        assert_eq!(produced.len(), e.targets.len(), "{}", app.rule);
        for (s, t) in produced.into_iter().zip(&e.targets) {
            assert_eq!(s.key(), plan.node(*t).sequent.key(), "{}", app.rule);
            live.insert(*t, s);
        }
        used.push(app.rule.clone());
    }
    assert!(live.is_empty(), "open tasks remain: {live:?}");
    used
}

fn concepts(rules: &[String]) -> Vec<String> {
    rules.iter().map(|r| r.trim_end_matches("-bwd").trim_end_matches("-fwd").to_string()).collect()
}

#[test]
fn both_directions_replay_to_closed_proofs() {
    let allowed = ["Def-eq", "Def-subset", "Def-supset", "Def-comp", "Def-inv", "deepaxiom"];
    for t in [t1(), t2()] {
        let plan = plan_for(&t);
        let used = replay(&plan);
        let cs = concepts(&used);
        assert!(cs.iter().all(|c| allowed.contains(&c.as_str())), "{cs:?}");
        assert_eq!(cs.iter().filter(|c| c.starts_with("Def-")).count(), 6, "{used:?}");
        assert_eq!(cs.iter().filter(|c| *c == "deepaxiom").count(), 1, "{used:?}");
    }
}

#[test]
fn the_equality_goal_closes_both_branches() {
    let plan = plan_for(&task("T0", "inv(comp(R,S)) = comp(inv(S),inv(R))"));
    let used = replay(&plan);
    assert_eq!(used[0], "Def-eq-bwd");
    assert_eq!(used.iter().filter(|r| *r == "deepaxiom").count(), 2);
    let inferences = plan.inferences();
    assert!(inferences.iter().filter(|a| a.direction == Direction::Backward).count() >= 7);
}

#[test]
fn budgets_and_unknown_names() {
    let t = relations();
    let out = run_strategy("close-by-definition", &t1(), &t, 2);
    assert!(out.exhausted);
    assert!(out.plan.is_none());
    let out = run_strategy("no-such-strategy", &t1(), &t, 5000);
    assert!(!out.exhausted);
    assert!(out.plan.is_none());
}

#[test]
fn a_strategy_without_applicable_rules_fails() {
    let out = run_strategy("close-by-logic", &t1(), &relations(), 5000);
    assert!(out.plan.is_none());
}

#[test]
fn runs_are_deterministic() {
    assert_eq!(plan_for(&t1()), plan_for(&t1()));
    assert_eq!(plan_for(&t1()).render(), plan_for(&t1()).render());
}

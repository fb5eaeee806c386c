use crate::logic::Sequent;
use crate::rules::{
    applicable_rules, apply, deepaxiom_application, or_l_application, Fresh, RuleApplication, RuleFilter, RuleSet,
};
use crate::theory::{AssertionKind, Theory};

use super::plan::{Edge, EdgeLabel, HierarchicalProofPlan, PlanNode};
use super::{SelectDirection, StrategyExpr, StrategyTable};

pub const DEFAULT_BUDGET: usize = 5000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub plan: Option<HierarchicalProofPlan>,
    pub exhausted: bool,
    pub spent: usize,
}

struct Exhausted;

struct Out {
    leaves: Vec<usize>,
    progressed: bool,
    failed: bool,
}

impl Out {
    fn stuck(node: usize, failed: bool) -> Self {
        Out { leaves: vec![node], progressed: false, failed }
    }
}

struct Runner<'a> {
    table: &'a StrategyTable,
    rules: &'a RuleSet,
    fresh: Fresh,
    budget: usize,
    spent: usize,
    plan: HierarchicalProofPlan,
}

fn select_filter(selector: &str, source: &str, direction: SelectDirection) -> RuleFilter {
    let mut f = match direction {
        SelectDirection::Backward => RuleFilter::backward(),
        SelectDirection::Forward => RuleFilter::forward(),
    };
    if direction == SelectDirection::Backward {
        f.close = true;
    }
    f.unfolding_only = true;
    f.kinds = Some(match source {
        "definitions" => vec![AssertionKind::Definition],
        "theorems" => vec![AssertionKind::Theorem],
        _ => vec![AssertionKind::Definition, AssertionKind::Theorem],
    });
    if selector != "*" {
        f.concept = Some(selector.to_string());
    }
    f
}

impl Runner<'_> {
    fn tick(&mut self) -> Result<(), Exhausted> {
        if self.spent >= self.budget {
            return Err(Exhausted);
        }
        self.spent += 1;
        Ok(())
    }

    fn add_node(&mut self, sequent: Sequent) -> usize {
        let id = self.plan.nodes.len();
        self.plan.nodes.push(PlanNode { id, sequent });
        id
    }

    fn add_edge(&mut self, label: EdgeLabel, source: usize, parent: Option<usize>, depth: usize) -> usize {
        let id = self.plan.edges.len();
        self.plan.edges.push(Edge { id, label, source, targets: Vec::new(), parent, children: Vec::new(), depth });
        match parent {
            Some(p) => self.plan.edges[p].children.push(id),
            None => self.plan.top.push(id),
        }
        id
    }

    fn remove_last_edge(&mut self, id: usize) {
        debug_assert_eq!(self.plan.edges.len(), id + 1);
        let e = self.plan.edges.pop().expect("edge exists");
        match e.parent {
            Some(p) => {
                self.plan.edges[p].children.retain(|c| *c != id);
            }
            None => self.plan.top.retain(|c| *c != id),
        }
    }

    fn infer(&mut self, app: &RuleApplication, node: usize, parent: Option<usize>, depth: usize) -> Option<Vec<usize>> {
        let seq = self.plan.nodes[node].sequent.clone();
        let (produced, done) = apply(app, &seq, &mut self.fresh).ok()?;
        let targets: Vec<usize> = produced.into_iter().map(|s| self.add_node(s)).collect();
        let e = self.add_edge(EdgeLabel::Inference(done), node, parent, depth);
        self.plan.edges[e].targets = targets.clone();
        Some(targets)
    }

    fn exec(&mut self, expr: &StrategyExpr, node: usize, parent: Option<usize>, depth: usize) -> Result<Out, Exhausted> {
        match expr {
            StrategyExpr::Call(name) => {
                let body = self.table.get(name).expect("resolved at load").clone();
                let edge = self.add_edge(EdgeLabel::Strategy(name.clone()), node, parent, depth);
                let out = self.exec(&body, node, Some(edge), depth + 1)?;
                if !out.progressed {
                    self.remove_last_edge(edge);
                    return Ok(Out::stuck(node, out.failed));
                }
                self.plan.edges[edge].targets = out.leaves.clone();
                Ok(out)
            }
            StrategyExpr::Seq(a, b) => {
                let first = self.exec(a, node, parent, depth)?;
                if first.failed {
                    return Ok(first);
                }
                let mut leaves = Vec::new();
                let mut progressed = first.progressed;
                let mut second_failed = false;
                for leaf in first.leaves {
                    let o = self.exec(b, leaf, parent, depth)?;
                    progressed |= o.progressed;
                    second_failed |= o.failed;
                    leaves.extend(o.leaves);
                }
                Ok(Out { leaves, progressed, failed: !progressed && second_failed })
            }
            StrategyExpr::Try(e) => {
                let mut o = self.exec(e, node, parent, depth)?;
                o.failed = false;
                Ok(o)
            }
            StrategyExpr::Repeat(body) => {
                let mut frontier = vec![node];
                let mut settled = Vec::new();
                let mut progressed = false;
                loop {
                    let mut next = Vec::new();
                    for n in frontier {
                        let o = self.exec(body, n, parent, depth)?;
                        if o.progressed {
                            progressed = true;
                            next.extend(o.leaves);
                        } else {
                            settled.push(n);
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
                if !progressed {
                    return Ok(Out::stuck(node, true));
                }
                Ok(Out { leaves: settled, progressed, failed: false })
            }
            StrategyExpr::First(alts) => {
                for alt in alts {
                    let o = self.exec(alt, node, parent, depth)?;
                    if o.progressed {
                        return Ok(o);
                    }
                }
                Ok(Out::stuck(node, true))
            }
            StrategyExpr::UseSelect { selector, source, direction } => {
                self.tick()?;
                let filter = select_filter(selector, source, *direction);
                let seq = self.plan.nodes[node].sequent.clone();
                let apps = applicable_rules(&seq, self.rules, &filter);
                let Some(first) = apps.first() else {
                    return Ok(Out::stuck(node, true));
                };
                match direction {
                    SelectDirection::Backward => match self.infer(first, node, parent, depth) {
                        Some(targets) => Ok(Out { leaves: targets, progressed: true, failed: false }),
                        None => Ok(Out::stuck(node, true)),
                    },
                    SelectDirection::Forward => {
                        let mut cur = node;
                        let mut progressed = false;
                        for wanted in &apps {
                            let seq = self.plan.nodes[cur].sequent.clone();
                            let now = applicable_rules(&seq, self.rules, &filter);
                            let Some(app) =
                                now.iter().find(|a| a.rule == wanted.rule && a.consumed == wanted.consumed)
                            else {
                                continue;
                            };
                            self.tick()?;
                            if let Some(t) = self.infer(app, cur, parent, depth) {
                                cur = t[0];
                                progressed = true;
                            }
                        }
                        Ok(Out { leaves: vec![cur], progressed, failed: !progressed })
                    }
                }
            }
            StrategyExpr::Builtin(name) => {
                self.tick()?;
                let seq = self.plan.nodes[node].sequent.clone();
                let app = match name.as_str() {
                    "deepaxiom" => deepaxiom_application(&seq),
                    _ => or_l_application(&seq),
                };
                match app.and_then(|a| self.infer(&a, node, parent, depth)) {
                    Some(targets) => Ok(Out { leaves: targets, progressed: true, failed: false }),
                    None => Ok(Out::stuck(node, true)),
                }
            }
        }
    }
}

/// Runs strategy `name` on `task`; names are drawn from `fresh`.
pub fn run_strategy_from(
    name: &str,
    task: &Sequent,
    table: &StrategyTable,
    rules: &RuleSet,
    fresh: Fresh,
    budget: usize,
) -> RunOutcome {
    if table.get(name).is_none() {
        return RunOutcome { plan: None, exhausted: false, spent: 0 };
    }
    let mut runner = Runner { table, rules, fresh, budget, spent: 0, plan: HierarchicalProofPlan::default() };
    let root = runner.add_node(task.clone());
    runner.plan.root = root;
    match runner.exec(&StrategyExpr::Call(name.to_string()), root, None, 0) {
        Err(Exhausted) => RunOutcome { plan: None, exhausted: true, spent: runner.spent },
        Ok(out) if !out.progressed => RunOutcome { plan: None, exhausted: false, spent: runner.spent },
        Ok(_) => RunOutcome { plan: Some(runner.plan), exhausted: false, spent: runner.spent },
    }
}

/// Runs a strategy of `theory` on a task; absent if it fails, is unknown,
/// or the budget runs out.
pub fn run_strategy(name: &str, task: &Sequent, theory: &Theory, budget: usize) -> RunOutcome {
    let rules = RuleSet::from_theory(theory);
    let fresh = Fresh::for_sequents([task]);
    run_strategy_from(name, task, &theory.strategies, &rules, fresh, budget)
}

use std::collections::BTreeSet;
use std::fmt;

use crate::logic::{Formula, Sequent};
use crate::rules::RuleApplication;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanNode {
    pub id: usize,
    pub sequent: Sequent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    Inference(RuleApplication),
    Strategy(String),
}

impl EdgeLabel {
    pub fn name(&self) -> &str {
        match self {
            EdgeLabel::Inference(app) => &app.rule,
            EdgeLabel::Strategy(s) => s,
        }
    }
}

/// An edge from one task to the tasks it leaves open (none: closed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    pub label: EdgeLabel,
    pub source: usize,
    pub targets: Vec<usize>,
    pub parent: Option<usize>,
    /// Refining edges, in execution order.
    pub children: Vec<usize>,
    /// Strategy nesting depth; top-level edges have depth 0.
    pub depth: usize,
}

impl Edge {
    pub fn is_strategy(&self) -> bool {
        matches!(self.label, EdgeLabel::Strategy(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HierarchicalProofPlan {
    pub nodes: Vec<PlanNode>,
    pub edges: Vec<Edge>,
    pub root: usize,
    /// Top-level edges out of the root.
    pub top: Vec<usize>,
}

/// Which edges to keep when flattening.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Level {
    /// Edges at this nesting depth (or shallower leaves).
    Depth(usize),
    /// Only the inference edges.
    Full,
    /// The named strategy or rule edges; unnamed strategies are refined.
    Names(BTreeSet<String>),
    /// Explicit edge ids; unselected strategies are refined.
    Edges(BTreeSet<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatEdge {
    pub edge: usize,
    pub label: String,
    pub source: usize,
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FlatGraph {
    pub edges: Vec<FlatEdge>,
}

impl FlatGraph {
    /// Follows single-target edges from `start`, returning the node chain
    /// (a closed end is not listed).
    pub fn chain_from(&self, start: usize) -> Vec<usize> {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(e) = self.edges.iter().find(|e| e.source == cur) {
            match e.targets.as_slice() {
                [next] => {
                    chain.push(*next);
                    cur = *next;
                }
                _ => break,
            }
        }
        chain
    }
}

impl HierarchicalProofPlan {
    pub fn node(&self, id: usize) -> &PlanNode {
        &self.nodes[id]
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn root_sequent(&self) -> &Sequent {
        &self.nodes[self.root].sequent
    }

    pub fn max_depth(&self) -> usize {
        self.edges.iter().map(|e| e.depth).max().unwrap_or(0)
    }

    /// Edges leaving `node`, most abstract first.
    pub fn outgoing(&self, node: usize) -> Vec<&Edge> {
        let mut out: Vec<&Edge> = self.edges.iter().filter(|e| e.source == node).collect();
        out.sort_by_key(|e| (e.depth, e.id));
        out
    }

    pub fn flatten_at_level(&self, level: &Level) -> Result<FlatGraph, String> {
        match level {
            Level::Depth(d) if *d > self.max_depth() => {
                return Err(format!("level {d} exceeds plan depth {}", self.max_depth()))
            }
            Level::Edges(ids) => {
                if let Some(bad) = ids.iter().find(|i| **i >= self.edges.len()) {
                    return Err(format!("no edge with id {bad}"));
                }
            }
            Level::Names(names) => {
                if let Some(bad) = names.iter().find(|n| !self.edges.iter().any(|e| e.label.name() == n.as_str())) {
                    return Err(format!("no edge labelled '{bad}'"));
                }
            }
            _ => {}
        }
        let mut out = FlatGraph::default();
        for &e in &self.top {
            self.flatten_edge(e, level, &mut out);
        }
        Ok(out)
    }

    fn flatten_edge(&self, id: usize, level: &Level, out: &mut FlatGraph) {
        let e = &self.edges[id];
        let keep = e.children.is_empty()
            || match level {
                Level::Depth(d) => e.depth >= *d,
                Level::Full => false,
                Level::Names(names) => names.contains(e.label.name()),
                Level::Edges(ids) => ids.contains(&id),
            };
        if keep {
            out.edges.push(FlatEdge { edge: id, label: e.label.name().to_string(), source: e.source, targets: e.targets.clone() });
        } else {
            for &c in &e.children {
                self.flatten_edge(c, level, out);
            }
        }
    }

    /// The inference applications of the fully flattened plan, in order.
    pub fn inferences(&self) -> Vec<&RuleApplication> {
        let flat = self.flatten_at_level(&Level::Full).unwrap_or_default();
        flat.edges
            .iter()
            .filter_map(|f| match &self.edges[f.edge].label {
                EdgeLabel::Inference(app) => Some(app),
                EdgeLabel::Strategy(_) => None,
            })
            .collect()
    }

    /// Tasks left open at the end of the plan.
    pub fn open_leaves(&self) -> Vec<usize> {
        let flat = self.flatten_at_level(&Level::Full).unwrap_or_default();
        let mut reached: Vec<usize> = vec![self.root];
        for e in &flat.edges {
            reached.extend(e.targets.iter().copied());
        }
        reached.into_iter().filter(|n| !flat.edges.iter().any(|e| e.source == *n)).collect()
    }

    pub fn is_closed(&self) -> bool {
        !self.top.is_empty() && self.open_leaves().is_empty()
    }

    /// Every hypothesis that occurs in some task of the plan, together with
    /// the raw conclusions of forward inferences.
    pub fn hypotheses(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        let mut push = |f: &Formula| {
            if !out.contains(f) {
                out.push(f.clone());
            }
        };
        for n in &self.nodes {
            n.sequent.hyps.iter().for_each(|h| push(&h.formula));
        }
        for e in &self.edges {
            if let EdgeLabel::Inference(app) = &e.label {
                if app.direction == crate::rules::Direction::Forward {
                    push(&app.conclusion);
                }
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for &e in &self.top {
            self.render_edge(e, 0, &mut out);
        }
        out
    }

    fn render_edge(&self, id: usize, indent: usize, out: &mut String) {
        let e = &self.edges[id];
        let targets = if e.targets.is_empty() {
            "closed".to_string()
        } else {
            e.targets.iter().map(|t| self.nodes[*t].sequent.label.clone()).collect::<Vec<_>>().join(", ")
        };
        out.push_str(&format!(
            "{}{} : {} -> {}\n",
            "  ".repeat(indent),
            e.label.name(),
            self.nodes[e.source].sequent.label,
            targets
        ));
        for &c in &e.children {
            self.render_edge(c, indent + 1, out);
        }
    }
}

impl FlatGraph {
    pub fn render(&self, plan: &HierarchicalProofPlan) -> String {
        self.edges
            .iter()
            .map(|e| {
                let targets = if e.targets.is_empty() {
                    "closed".to_string()
                } else {
                    e.targets.iter().map(|t| plan.nodes[*t].sequent.label.clone()).collect::<Vec<_>>().join(", ")
                };
                format!("{} --{}--> {}", plan.nodes[e.source].sequent.label, e.label, targets)
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for HierarchicalProofPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

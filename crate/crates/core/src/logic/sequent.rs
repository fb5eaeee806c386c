use std::collections::BTreeSet;
use std::fmt;

use super::render::render_formula;
use super::subst::Subst;
use super::syntax::Formula;
use super::unify::{alpha_eq, alpha_key};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyp {
    pub label: String,
    pub formula: Formula,
}

/// A proof task: hypotheses entail a single goal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub label: String,
    pub hyps: Vec<Hyp>,
    pub goal: Formula,
    /// Keys of forward applications already performed on this task, so that
    /// witness-introducing rules are not re-applied to the same hypotheses.
    pub used: BTreeSet<String>,
}

impl Sequent {
    pub fn new(label: impl Into<String>, goal: Formula) -> Self {
        Sequent { label: label.into(), hyps: Vec::new(), goal, used: BTreeSet::new() }
    }

    pub fn with_hyps(label: impl Into<String>, hyps: Vec<Hyp>, goal: Formula) -> Self {
        Sequent { label: label.into(), hyps, goal, used: BTreeSet::new() }
    }

    pub fn hyp(&self, label: &str) -> Option<&Hyp> {
        self.hyps.iter().find(|h| h.label == label)
    }

    pub fn has_hyp(&self, f: &Formula) -> bool {
        self.hyps.iter().any(|h| alpha_eq(&h.formula, f))
    }

    /// Adds a hypothesis unless an alpha-equivalent one is present.
    pub fn push_hyp(&mut self, label: String, f: Formula) -> bool {
        if self.has_hyp(&f) {
            return false;
        }
        self.hyps.push(Hyp { label, formula: f });
        true
    }

    pub fn apply_subst(&mut self, s: &Subst) {
        if s.is_empty() {
            return;
        }
        for h in &mut self.hyps {
            h.formula = s.apply(&h.formula);
        }
        self.goal = s.apply(&self.goal);
    }

    pub fn map_formulas(&mut self, f: impl Fn(&Formula) -> Formula) {
        for h in &mut self.hyps {
            h.formula = f(&h.formula);
        }
        self.goal = f(&self.goal);
    }

    /// Identifiers occurring anywhere in the task.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = self.goal.names();
        for h in &self.hyps {
            out.extend(h.formula.names());
        }
        out
    }

    pub fn consts(&self) -> BTreeSet<String> {
        let mut out = self.goal.consts();
        for h in &self.hyps {
            out.extend(h.formula.consts());
        }
        out
    }

    pub fn metas(&self) -> BTreeSet<String> {
        let mut out = self.goal.metas();
        for h in &self.hyps {
            out.extend(h.formula.metas());
        }
        out
    }

    /// Canonical key: hypotheses as a set (labels ignored) and the goal, up to
    /// alpha-equivalence.
    pub fn key(&self) -> String {
        let mut hyps: Vec<String> = self.hyps.iter().map(|h| alpha_key(&h.formula)).collect();
        hyps.sort();
        hyps.dedup();
        format!("{} |- {}", hyps.join(" ; "), alpha_key(&self.goal))
    }

    pub fn render(&self) -> String {
        let hyps: Vec<String> = self.hyps.iter().map(|h| render_formula(&h.formula)).collect();
        if hyps.is_empty() {
            format!("|- {}", render_formula(&self.goal))
        } else {
            format!("{} |- {}", hyps.join(", "), render_formula(&self.goal))
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.render())
    }
}

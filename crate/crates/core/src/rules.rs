//! Assertion-level inference rules: synthesis from theory assertions,
//! enumeration of applications on a sequent, and application.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::logic::{
    alpha_eq, instantiate, match_formula, render_formula, unify_with, Formula, Hyp, Sequent, Subst, Term,
};
use crate::theory::{Assertion, AssertionKind, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
    Close,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceRule {
    pub name: String,
    pub concept: String,
    pub direction: Direction,
    /// Forward: hypothesis patterns. Backward: the single new goal.
    pub premises: Vec<Formula>,
    /// Forward: the derived formula. Backward and close: the goal pattern.
    pub conclusion: Formula,
    pub hyp_intro: usize,
    pub is_buggy: bool,
    pub kind: AssertionKind,
    /// Expands the defined notion rather than folding it back.
    pub unfolding: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Synthesized {
    pub rules: Vec<InferenceRule>,
    pub diagnostic: Option<String>,
}

fn strip_to_metas(f: &Formula) -> Formula {
    let (vars, body) = f.strip_forall();
    let mut out = body.clone();
    for v in vars {
        out = instantiate(&out, &v, &Term::meta(&v));
    }
    out
}

fn fresh_meta_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !avoid.contains(n)).expect("unbounded")
}

/// Splits conjunctions and opens existentials into meta-variables.
fn flatten_premises(f: &Formula, metas: &mut BTreeSet<String>, out: &mut Vec<Formula>) {
    match f {
        Formula::And(a, b) => {
            flatten_premises(a, metas, out);
            flatten_premises(b, metas, out);
        }
        Formula::Exists(x, body) => {
            let m = fresh_meta_name(x, metas);
            metas.insert(m.clone());
            flatten_premises(&instantiate(body, x, &Term::meta(&m)), metas, out);
        }
        other => out.push(other.clone()),
    }
}

/// Hypotheses that normalising `goal` as a proof goal would introduce.
pub fn goal_hyp_count(goal: &Formula) -> usize {
    match goal {
        Formula::Forall(_, body) | Formula::Exists(_, body) => goal_hyp_count(body),
        Formula::Implies(a, b) => hyp_count(a) + goal_hyp_count(b),
        Formula::Iff(a, b) => hyp_count(a) + goal_hyp_count(b) + hyp_count(b) + goal_hyp_count(a),
        Formula::And(a, b) if a.metas().is_disjoint(&b.metas()) => goal_hyp_count(a) + goal_hyp_count(b),
        _ => 0,
    }
}

fn hyp_count(f: &Formula) -> usize {
    match f {
        Formula::And(a, b) => hyp_count(a) + hyp_count(b),
        Formula::Exists(_, body) => hyp_count(body),
        _ => 1,
    }
}

struct RuleSpec<'a> {
    a: &'a Assertion,
    suffix: &'static str,
    direction: Direction,
    unfolding: bool,
}

impl RuleSpec<'_> {
    fn build(&self, premises: Vec<Formula>, conclusion: Formula) -> InferenceRule {
        let hyp_intro = match self.direction {
            Direction::Backward => premises.first().map_or(0, goal_hyp_count),
            _ => 0,
        };
        InferenceRule {
            name: format!("{}-{}", self.a.label, self.suffix),
            concept: self.a.concept.clone(),
            direction: self.direction,
            premises,
            conclusion,
            hyp_intro,
            is_buggy: self.a.kind == AssertionKind::Buggy,
            kind: self.a.kind,
            unfolding: self.unfolding,
        }
    }
}

fn premises_of(lhs: &Formula, rhs: &Formula) -> Vec<Formula> {
    let mut metas = lhs.metas();
    metas.extend(rhs.metas());
    let mut prem = Vec::new();
    flatten_premises(lhs, &mut metas, &mut prem);
    prem
}

fn forward_rule(a: &Assertion, suffix: &'static str, unfolding: bool, lhs: &Formula, rhs: &Formula) -> InferenceRule {
    RuleSpec { a, suffix, direction: Direction::Forward, unfolding }.build(premises_of(lhs, rhs), rhs.clone())
}

/// Goal `goal` is replaced by the new goal `new_goal`.
fn backward_rule(a: &Assertion, suffix: &'static str, unfolding: bool, goal: &Formula, new_goal: &Formula) -> InferenceRule {
    RuleSpec { a, suffix, direction: Direction::Backward, unfolding }.build(vec![new_goal.clone()], goal.clone())
}

/// Builds the inference rules of an assertion: implications give a forward
/// and a backward rule, equivalences both orientations of each, atoms a
/// closing rule.
pub fn synthesize_inferences(a: &Assertion) -> Synthesized {
    let mut body = strip_to_metas(&a.formula);
    // curry nested implications: A -> (B -> C) becomes A /\ B -> C
    while let Formula::Implies(p, q) = &body {
        let q = strip_to_metas(q);
        match q {
            Formula::Implies(q1, q2) => body = Formula::implies(Formula::and((**p).clone(), *q1), *q2),
            _ => {
                body = Formula::implies((**p).clone(), q);
                break;
            }
        }
    }
    let rules = match &body {
        Formula::Implies(p, q) => vec![forward_rule(a, "fwd", true, p, q), backward_rule(a, "bwd", true, q, p)],
        Formula::Iff(l, r) => vec![
            forward_rule(a, "fwd", true, l, r),
            backward_rule(a, "bwd", true, l, r),
            forward_rule(a, "rev-fwd", false, r, l),
            backward_rule(a, "rev-bwd", false, r, l),
        ],
        Formula::Atom(..) => {
            vec![RuleSpec { a, suffix: "close", direction: Direction::Close, unfolding: true }.build(Vec::new(), body.clone())]
        }
        other => {
            return Synthesized {
                rules: Vec::new(),
                diagnostic: Some(format!(
                    "assertion '{}' has unsupported shape '{}': expected a universally quantified implication, equivalence or atom",
                    a.label,
                    render_formula(other)
                )),
            }
        }
    };
    Synthesized { rules, diagnostic: None }
}

/// All rules synthesized from a theory, in theory order.
#[derive(Clone, Debug, Default)]
pub struct RuleSet {
    pub rules: Vec<InferenceRule>,
    pub diagnostics: Vec<String>,
}

impl RuleSet {
    pub fn from_theory(theory: &Theory) -> Self {
        Self::from_assertions(&theory.assertions)
    }

    pub fn from_assertions(assertions: &[Assertion]) -> Self {
        let mut set = RuleSet::default();
        for a in assertions {
            let s = synthesize_inferences(a);
            set.rules.extend(s.rules);
            set.diagnostics.extend(s.diagnostic);
        }
        set
    }

    pub fn get(&self, name: &str) -> Option<&InferenceRule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

/// Which rules an enumeration may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleFilter {
    pub forward: bool,
    pub backward: bool,
    pub close: bool,
    pub buggy: bool,
    pub unfolding_only: bool,
    pub kinds: Option<Vec<AssertionKind>>,
    pub concept: Option<String>,
}

impl RuleFilter {
    pub fn all() -> Self {
        RuleFilter {
            forward: true,
            backward: true,
            close: true,
            buggy: false,
            unfolding_only: false,
            kinds: None,
            concept: None,
        }
    }

    pub fn backward() -> Self {
        RuleFilter { forward: false, close: false, ..Self::all() }
    }

    pub fn forward() -> Self {
        RuleFilter { backward: false, close: false, ..Self::all() }
    }

    pub fn with_buggy(mut self) -> Self {
        self.buggy = true;
        self
    }

    pub fn admits(&self, r: &InferenceRule) -> bool {
        let dir_ok = match r.direction {
            Direction::Forward => self.forward,
            Direction::Backward => self.backward,
            Direction::Close => self.close,
        };
        dir_ok
            && (!r.is_buggy || self.buggy)
            && (!self.unfolding_only || r.unfolding)
            && self.kinds.as_ref().is_none_or(|ks| r.is_buggy || ks.contains(&r.kind))
            && self.concept.as_ref().is_none_or(|c| *c == r.concept)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AppKind {
    Assertion,
    Axiom,
    OrL,
    Cut,
}

/// One application of a rule (or structural step) to a sequent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleApplication {
    pub rule: String,
    pub concept: String,
    pub direction: Direction,
    pub kind: AppKind,
    pub is_buggy: bool,
    /// Bindings of the rule's meta-variables.
    pub subst: Subst,
    pub target: String,
    pub target_key: String,
    /// Position of the affected goal part (0 = left, 1 = right under /\ and \/).
    pub position: Vec<usize>,
    pub consumed: Vec<String>,
    /// Instantiated premises and conclusion; unbound rule meta-variables
    /// are named apart from the target sequent.
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub open_metas: Vec<String>,
    pub hyp_intro: usize,
    /// Global bindings made by an axiom closure.
    pub binding: Subst,
    pub produced: Vec<String>,
    pub produced_hyps: Vec<Formula>,
}

impl RuleApplication {
    pub fn is_structural(&self) -> bool {
        self.kind != AppKind::Assertion
    }

    fn structural(kind: AppKind, name: &str, s: &Sequent) -> Self {
        RuleApplication {
            rule: name.to_string(),
            concept: name.to_string(),
            direction: if kind == AppKind::Axiom { Direction::Close } else { Direction::Forward },
            kind,
            is_buggy: false,
            subst: Subst::new(),
            target: s.label.clone(),
            target_key: s.key(),
            position: Vec::new(),
            consumed: Vec::new(),
            premises: Vec::new(),
            conclusion: s.goal.clone(),
            open_metas: Vec::new(),
            hyp_intro: 0,
            binding: Subst::new(),
            produced: Vec::new(),
            produced_hyps: Vec::new(),
        }
    }

    fn used_key(&self) -> String {
        format!("{}@{}", self.rule, self.consumed.join(","))
    }
}

impl fmt::Display for RuleApplication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.rule, self.target)?;
        if !self.consumed.is_empty() {
            write!(f, " from {}", self.consumed.join(","))?;
        }
        if !self.subst.is_empty() {
            write!(f, " {}", self.subst)?;
        }
        if !self.produced.is_empty() {
            write!(f, " -> {}", self.produced.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("stale application of {rule}: sequent {label} has changed")]
    Stale { rule: String, label: String },
    #[error("{0} is not applicable")]
    NotApplicable(String),
}

/// Supply of fresh names and labels, shared across one proof state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fresh {
    pub used: BTreeSet<String>,
    pub next_task: usize,
    pub next_hyp: usize,
}

const NAME_BASES: [&str; 3] = ["x", "y", "z"];

impl Fresh {
    pub fn new(used: BTreeSet<String>, next_task: usize, next_hyp: usize) -> Self {
        Fresh { used, next_task, next_hyp }
    }

    /// Next unused name from x, y, z, x1, y1, z1, ...
    pub fn name(&mut self) -> String {
        let name = (0..)
            .flat_map(|round| {
                NAME_BASES.iter().map(move |b| if round == 0 { b.to_string() } else { format!("{b}{round}") })
            })
            .find(|n| !self.used.contains(n))
            .expect("unbounded");
        self.used.insert(name.clone());
        name
    }

    pub fn meta(&mut self, base: &str) -> String {
        let key = |n: &str| format!("?{n}");
        let name = if !self.used.contains(&key(base)) {
            base.to_string()
        } else {
            (1..).map(|i| format!("{base}{i}")).find(|n| !self.used.contains(&key(n))).expect("unbounded")
        };
        self.used.insert(key(&name));
        name
    }

    pub fn task(&mut self) -> String {
        self.next_task += 1;
        format!("T{}", self.next_task)
    }

    pub fn hyp(&mut self) -> String {
        self.next_hyp += 1;
        format!("h{}", self.next_hyp)
    }

    /// Registers every name of `s` (constants, bound names and `?meta`s).
    pub fn reserve(&mut self, s: &Sequent) {
        self.used.extend(s.names());
        self.used.extend(s.metas().into_iter().map(|m| format!("?{m}")));
    }

    /// A supply avoiding every name in `seqs` and continuing their
    /// `T<n>` / `h<n>` label numbering.
    pub fn for_sequents<'a>(seqs: impl IntoIterator<Item = &'a Sequent>) -> Self {
        let mut f = Fresh::default();
        let num = |l: &str, p: char| l.strip_prefix(p).and_then(|n| n.parse::<usize>().ok()).unwrap_or(0);
        for s in seqs {
            f.reserve(s);
            f.next_task = f.next_task.max(num(&s.label, 'T'));
            for h in &s.hyps {
                f.next_hyp = f.next_hyp.max(num(&h.label, 'h'));
            }
        }
        f
    }
}

/// Goal normalisation: universals become fresh constants, implications move
/// their antecedent into the hypotheses, equivalences and meta-disjoint
/// conjunctions split, existentials become fresh meta-variables.
pub fn normalize_goal(goal: &Formula, fresh: &mut Fresh) -> Vec<(Vec<Formula>, Formula)> {
    match goal {
        Formula::Forall(x, body) => {
            let c = fresh.name();
            normalize_goal(&instantiate(body, x, &Term::cnst(&c)), fresh)
        }
        Formula::Exists(x, body) => {
            let m = fresh.meta(x);
            normalize_goal(&instantiate(body, x, &Term::meta(&m)), fresh)
        }
        Formula::Implies(a, b) => {
            let hyps = normalize_hyp(a, fresh);
            normalize_goal(b, fresh)
                .into_iter()
                .map(|(mut hs, g)| {
                    let mut all = hyps.clone();
                    all.append(&mut hs);
                    (all, g)
                })
                .collect()
        }
        Formula::Iff(a, b) => {
            let mut out = normalize_goal(&Formula::implies((**a).clone(), (**b).clone()), fresh);
            out.extend(normalize_goal(&Formula::implies((**b).clone(), (**a).clone()), fresh));
            out
        }
        Formula::And(a, b) if a.metas().is_disjoint(&b.metas()) && !has_inner_exists(a) && !has_inner_exists(b) => {
            let mut out = normalize_goal(a, fresh);
            out.extend(normalize_goal(b, fresh));
            out
        }
        other => vec![(Vec::new(), open_goal_exists(other, fresh))],
    }
}

fn has_inner_exists(f: &Formula) -> bool {
    match f {
        Formula::Exists(..) => true,
        Formula::And(a, b) | Formula::Or(a, b) => has_inner_exists(a) || has_inner_exists(b),
        _ => false,
    }
}

/// Replaces existentials in positive conjunctive/disjunctive goal positions
/// by fresh meta-variables.
fn open_goal_exists(f: &Formula, fresh: &mut Fresh) -> Formula {
    match f {
        Formula::Exists(x, body) => {
            let m = fresh.meta(x);
            open_goal_exists(&instantiate(body, x, &Term::meta(&m)), fresh)
        }
        Formula::And(a, b) => Formula::and(open_goal_exists(a, fresh), open_goal_exists(b, fresh)),
        Formula::Or(a, b) => Formula::or(open_goal_exists(a, fresh), open_goal_exists(b, fresh)),
        other => other.clone(),
    }
}

/// Hypothesis normalisation: conjunctions split, existentials get fresh
/// witness constants.
pub fn normalize_hyp(f: &Formula, fresh: &mut Fresh) -> Vec<Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = normalize_hyp(a, fresh);
            out.extend(normalize_hyp(b, fresh));
            out
        }
        Formula::Exists(x, body) => {
            let c = fresh.name();
            normalize_hyp(&instantiate(body, x, &Term::cnst(&c)), fresh)
        }
        other => vec![other.clone()],
    }
}

/// Goal parts reachable through /\ and \/, in pre-order.
fn goal_positions(goal: &Formula) -> Vec<(Vec<usize>, &Formula)> {
    fn go<'a>(f: &'a Formula, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Formula)>) {
        out.push((path.clone(), f));
        if let Formula::And(a, b) | Formula::Or(a, b) = f {
            path.push(0);
            go(a, path, out);
            path.pop();
            path.push(1);
            go(b, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(goal, &mut Vec::new(), &mut out);
    out
}

fn replace_at(f: &Formula, path: &[usize], new: &Formula) -> Formula {
    match (path.split_first(), f) {
        (None, _) => new.clone(),
        (Some((0, rest)), Formula::And(a, b)) => Formula::and(replace_at(a, rest, new), (**b).clone()),
        (Some((_, rest)), Formula::And(a, b)) => Formula::and((**a).clone(), replace_at(b, rest, new)),
        (Some((0, rest)), Formula::Or(a, b)) => Formula::or(replace_at(a, rest, new), (**b).clone()),
        (Some((_, rest)), Formula::Or(a, b)) => Formula::or((**a).clone(), replace_at(b, rest, new)),
        _ => f.clone(),
    }
}

/// Removes a discharged goal part; `None` when the whole goal is discharged.
fn discharge_at(f: &Formula, path: &[usize]) -> Option<Formula> {
    match (path.split_first(), f) {
        (None, _) => None,
        (Some((i, rest)), Formula::And(a, b)) => {
            let (sub, other) = if *i == 0 { (a, b) } else { (b, a) };
            match discharge_at(sub, rest) {
                None => Some((**other).clone()),
                Some(s) => Some(if *i == 0 { Formula::and(s, (**b).clone()) } else { Formula::and((**a).clone(), s) }),
            }
        }
        (Some((i, rest)), Formula::Or(a, b)) => {
            let sub = if *i == 0 { a } else { b };
            let s = discharge_at(sub, rest)?;
            Some(if *i == 0 { Formula::or(s, (**b).clone()) } else { Formula::or((**a).clone(), s) })
        }
        _ => Some(f.clone()),
    }
}

fn rename_apart(rule_metas: &BTreeSet<String>, bound: &Subst, s: &Sequent) -> Subst {
    let mut avoid = s.metas();
    avoid.extend(rule_metas.iter().cloned());
    for (_, t) in bound.iter() {
        let mut ms = BTreeSet::new();
        t.collect_metas(&mut ms);
        avoid.extend(ms);
    }
    let mut out = Subst::new();
    for m in rule_metas.iter().filter(|m| bound.get(m).is_none()) {
        let target_metas = s.metas();
        if target_metas.contains(m) {
            let n = fresh_meta_name(m, &avoid);
            avoid.insert(n.clone());
            out.insert_raw(m, Term::meta(&n));
        }
    }
    out
}

fn instantiate_app(rule: &InferenceRule, subst: Subst, s: &Sequent) -> (Vec<Formula>, Formula, Vec<String>, Subst) {
    let mut rule_metas = rule.conclusion.metas();
    for p in &rule.premises {
        rule_metas.extend(p.metas());
    }
    let renaming = rename_apart(&rule_metas, &subst, s);
    let mut full = subst.clone();
    for (k, v) in renaming.iter() {
        full.insert_raw(k, v.clone());
    }
    let open: Vec<String> = rule_metas
        .iter()
        .filter(|m| subst.get(m).is_none())
        .map(|m| match renaming.get(m) {
            Some(Term::Meta(n)) => n.clone(),
            _ => m.clone(),
        })
        .collect();
    let premises = rule.premises.iter().map(|p| full.apply(p)).collect();
    let conclusion = full.apply(&rule.conclusion);
    (premises, conclusion, open, subst)
}

fn base_app(rule: &InferenceRule, s: &Sequent) -> RuleApplication {
    RuleApplication {
        rule: rule.name.clone(),
        concept: rule.concept.clone(),
        direction: rule.direction,
        kind: AppKind::Assertion,
        is_buggy: rule.is_buggy,
        subst: Subst::new(),
        target: s.label.clone(),
        target_key: s.key(),
        position: Vec::new(),
        consumed: Vec::new(),
        premises: Vec::new(),
        conclusion: s.goal.clone(),
        open_metas: Vec::new(),
        hyp_intro: 0,
        binding: Subst::new(),
        produced: Vec::new(),
        produced_hyps: Vec::new(),
    }
}

/// Every application of an admitted rule on `s`, in rule order, then goal
/// position or hypothesis order.
pub fn applicable_rules(s: &Sequent, rules: &RuleSet, filter: &RuleFilter) -> Vec<RuleApplication> {
    let mut out = Vec::new();
    for rule in rules.rules.iter().filter(|r| filter.admits(r)) {
        match rule.direction {
            Direction::Backward | Direction::Close => {
                for (path, part) in goal_positions(&s.goal) {
                    let mut subst = Subst::new();
                    if !match_formula(&rule.conclusion, part, &mut subst) {
                        continue;
                    }
                    let (premises, conclusion, open, subst) = instantiate_app(rule, subst, s);
                    let mut app = base_app(rule, s);
                    if rule.direction == Direction::Backward {
                        let new_goal = replace_at(&s.goal, &path, &premises[0]);
                        app.hyp_intro = goal_hyp_count(&new_goal);
                    }
                    app.subst = subst;
                    app.position = path;
                    app.premises = premises;
                    app.conclusion = conclusion;
                    app.open_metas = open;
                    out.push(app);
                }
            }
            Direction::Forward => {
                let mut chosen = Vec::new();
                forward_matches(rule, s, 0, Subst::new(), &mut chosen, &mut out);
            }
        }
    }
    out
}

fn forward_matches(
    rule: &InferenceRule,
    s: &Sequent,
    i: usize,
    subst: Subst,
    chosen: &mut Vec<usize>,
    out: &mut Vec<RuleApplication>,
) {
    if i == rule.premises.len() {
        if rule.premises.is_empty() {
            return;
        }
        let consumed: Vec<String> = chosen.iter().map(|&k| s.hyps[k].label.clone()).collect();
        let (premises, conclusion, open, subst) = instantiate_app(rule, subst, s);
        let mut app = base_app(rule, s);
        app.subst = subst;
        app.consumed = consumed;
        app.premises = premises;
        app.conclusion = conclusion.clone();
        app.open_metas = open;
        if s.used.contains(&app.used_key()) {
            return;
        }
        let parts = conclusion.conjuncts();
        if parts.iter().all(|p| s.has_hyp(p)) {
            return;
        }
        out.push(app);
        return;
    }
    for (k, h) in s.hyps.iter().enumerate() {
        if chosen.contains(&k) {
            continue;
        }
        let mut next = subst.clone();
        if match_formula(&rule.premises[i], &h.formula, &mut next) {
            chosen.push(k);
            forward_matches(rule, s, i + 1, next, chosen, out);
            chosen.pop();
        }
    }
}

fn rename_open(app: &RuleApplication, fresh: &mut Fresh) -> Subst {
    let mut r = Subst::new();
    for m in &app.open_metas {
        let n = fresh.meta(m);
        if n != *m {
            r.insert_raw(m, Term::meta(&n));
        }
    }
    r
}

/// Applies `app` to `s`. Backward rules yield the new goal sequents (none
/// for a closing rule); forward rules yield `s` with the derived
/// hypotheses. The returned application records what was produced.
pub fn apply(app: &RuleApplication, s: &Sequent, fresh: &mut Fresh) -> Result<(Vec<Sequent>, RuleApplication), ApplyError> {
    if s.key() != app.target_key {
        return Err(ApplyError::Stale { rule: app.rule.clone(), label: s.label.clone() });
    }
    let mut done = app.clone();
    match (app.kind, app.direction) {
        (AppKind::Assertion, Direction::Close) => {
            let out = match discharge_at(&s.goal, &app.position) {
                None => Vec::new(),
                Some(g) => {
                    let mut t = s.clone();
                    t.label = fresh.task();
                    t.goal = g;
                    done.produced.push(t.label.clone());
                    vec![t]
                }
            };
            Ok((out, done))
        }
        (AppKind::Assertion, Direction::Backward) => {
            let renaming = rename_open(app, fresh);
            let new_part = renaming.apply(&app.premises[0]);
            let new_goal = replace_at(&s.goal, &app.position, &new_part);
            let mut out = Vec::new();
            let mut intro = 0;
            for (hyps, goal) in normalize_goal(&new_goal, fresh) {
                let mut t = s.clone();
                t.label = fresh.task();
                t.goal = goal;
                for h in hyps {
                    if t.push_hyp(fresh.hyp(), h.clone()) {
                        intro += 1;
                        done.produced_hyps.push(h);
                    }
                }
                done.produced.push(t.label.clone());
                out.push(t);
            }
            done.hyp_intro = intro;
            Ok((out, done))
        }
        (AppKind::Assertion, Direction::Forward) => {
            let renaming = rename_open(app, fresh);
            let derived = renaming.apply(&app.conclusion);
            let mut t = s.clone();
            t.label = fresh.task();
            t.used.insert(app.used_key());
            for h in normalize_hyp(&derived, fresh) {
                if t.push_hyp(fresh.hyp(), h.clone()) {
                    done.produced_hyps.push(h);
                }
            }
            done.conclusion = derived;
            done.produced.push(t.label.clone());
            Ok((vec![t], done))
        }
        (AppKind::Axiom, _) => match axiom_closure(s) {
            Some(binding) if binding == app.binding => Ok((Vec::new(), done)),
            _ => Err(ApplyError::NotApplicable(app.rule.clone())),
        },
        (AppKind::OrL, _) => {
            let (Some(label), Some(idx)) =
                (app.consumed.first(), app.consumed.first().and_then(|l| s.hyps.iter().position(|h| h.label == *l)))
            else {
                return Err(ApplyError::NotApplicable(app.rule.clone()));
            };
            let Formula::Or(a, b) = &s.hyps[idx].formula else {
                return Err(ApplyError::NotApplicable(format!("{} on {label}", app.rule)));
            };
            // each case may choose its own witnesses for the goal's meta-variables
            let mut hyp_metas = BTreeSet::new();
            for h in &s.hyps {
                hyp_metas.extend(h.formula.metas());
            }
            let goal_metas: Vec<String> = s.goal.metas().difference(&hyp_metas).cloned().collect();
            let mut out = Vec::new();
            for part in [a, b] {
                let mut t = s.clone();
                t.hyps.remove(idx);
                t.label = fresh.task();
                let mut r = Subst::new();
                for m in &goal_metas {
                    r.insert_raw(m, Term::meta(&fresh.meta(m)));
                }
                t.goal = r.apply(&t.goal);
                for h in normalize_hyp(part, fresh) {
                    if t.push_hyp(fresh.hyp(), h.clone()) {
                        done.produced_hyps.push(h);
                    }
                }
                done.produced.push(t.label.clone());
                out.push(t);
            }
            Ok((out, done))
        }
        (AppKind::Cut, _) => Err(ApplyError::NotApplicable(app.rule.clone())),
    }
}

/// All ways of closing `goal` from `hyps`: the whole goal unifies with a
/// hypothesis, or every conjunct (some disjunct) does.
fn axiom_solutions(goal: &Formula, hyps: &[Hyp], sigma: &Subst, out: &mut Vec<Subst>) {
    for h in hyps {
        let mut s = sigma.clone();
        if unify_with(goal, &h.formula, &mut s) && !out.contains(&s) {
            out.push(s);
        }
    }
    match goal {
        Formula::And(a, b) => {
            let mut left = Vec::new();
            axiom_solutions(a, hyps, sigma, &mut left);
            for s in left {
                let mut both = Vec::new();
                axiom_solutions(b, hyps, &s, &mut both);
                for t in both {
                    if !out.contains(&t) {
                        out.push(t);
                    }
                }
            }
        }
        Formula::Or(a, b) => {
            axiom_solutions(a, hyps, sigma, out);
            axiom_solutions(b, hyps, sigma, out);
        }
        _ => {}
    }
}

/// The first substitution under which the goal follows by the axiom rule.
pub fn axiom_closure(s: &Sequent) -> Option<Subst> {
    if s.hyps.iter().any(|h| alpha_eq(&h.formula, &s.goal)) {
        return Some(Subst::new());
    }
    let mut sols = Vec::new();
    axiom_solutions(&s.goal, &s.hyps, &Subst::new(), &mut sols);
    sols.into_iter().next()
}

pub fn deepaxiom_application(s: &Sequent) -> Option<RuleApplication> {
    let binding = axiom_closure(s)?;
    let mut app = RuleApplication::structural(AppKind::Axiom, "deepaxiom", s);
    app.binding = binding;
    Some(app)
}

/// Case split on the first disjunctive hypothesis.
pub fn or_l_application(s: &Sequent) -> Option<RuleApplication> {
    let h = s.hyps.iter().find(|h| matches!(h.formula, Formula::Or(..)))?;
    let mut app = RuleApplication::structural(AppKind::OrL, "or-l", s);
    app.consumed.push(h.label.clone());
    app.premises.push(h.formula.clone());
    Some(app)
}

/// Case split on a given disjunctive hypothesis.
pub fn or_l_on(s: &Sequent, label: &str) -> Option<RuleApplication> {
    let h = s.hyp(label)?;
    if !matches!(h.formula, Formula::Or(..)) {
        return None;
    }
    let mut app = RuleApplication::structural(AppKind::OrL, "or-l", s);
    app.consumed.push(h.label.clone());
    app.premises.push(h.formula.clone());
    Some(app)
}

pub fn cut_application(s: &Sequent, lemma: &Formula) -> RuleApplication {
    let mut app = RuleApplication::structural(AppKind::Cut, "cut", s);
    app.conclusion = lemma.clone();
    app
}

/// Names of the rule meta-variables bound in an application, for traces.
pub fn render_subst(s: &Subst) -> BTreeMap<String, String> {
    s.iter().map(|(k, v)| (format!("?{k}"), v.to_string())).collect()
}

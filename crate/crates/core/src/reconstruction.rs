//! Model tracing: mental proof states and the depth-limited search that
//! fills in the inferences a student step leaves implicit.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::logic::{instantiate, replace_consts, unify_with, Formula, Sequent, Subst, Term};
use crate::rules::{
    applicable_rules, apply, cut_application, deepaxiom_application, normalize_goal, or_l_on, AppKind,
    ApplyError, Fresh, RuleApplication, RuleFilter, RuleSet,
};
use crate::script::{ProofStep, SetValue};
use crate::strategy::run_strategy_from;
use crate::theory::{Exercise, Theory};

/// Open sequents, the marked current one, and the global substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MentalProofState {
    pub sequents: Vec<Sequent>,
    pub marked: usize,
    pub sigma: Subst,
    pub history: Vec<RuleApplication>,
    pub abbreviations: Vec<(String, SetValue)>,
    pub last_fact: Option<Formula>,
    pub next_task: usize,
    pub next_hyp: usize,
}

impl MentalProofState {
    pub fn new(goal: Formula) -> Self {
        MentalProofState {
            sequents: vec![Sequent::new("T0", goal)],
            marked: 0,
            sigma: Subst::new(),
            history: Vec::new(),
            abbreviations: Vec::new(),
            last_fact: None,
            next_task: 0,
            next_hyp: 0,
        }
    }

    pub fn marked_sequent(&self) -> Option<&Sequent> {
        self.sequents.get(self.marked)
    }

    pub fn is_complete(&self) -> bool {
        self.sequents.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.sequents.iter().position(|s| s.label == label)
    }

    /// Name supply avoiding everything in the state.
    pub fn fresh(&self) -> Fresh {
        let mut f = Fresh::for_sequents(self.sequents.iter());
        f.next_task = f.next_task.max(self.next_task);
        f.next_hyp = f.next_hyp.max(self.next_hyp);
        for (name, _) in &self.abbreviations {
            f.used.insert(name.clone());
        }
        f.used.extend(self.sigma.domain().map(|m| format!("?{m}")));
        f
    }

    pub fn consts(&self) -> BTreeSet<String> {
        self.sequents.iter().flat_map(|s| s.consts()).collect()
    }

    fn hyp_labels(&self) -> BTreeSet<String> {
        self.sequents.iter().flat_map(|s| s.hyps.iter().map(|h| h.label.clone())).collect()
    }

    /// Canonical key up to alpha-equivalence and labels.
    pub fn key(&self) -> String {
        let seqs: Vec<String> = self.sequents.iter().map(Sequent::key).collect();
        format!("{}#{}", seqs.join(" || "), self.marked)
    }

    fn bind(&mut self, binding: &Subst) {
        if binding.is_empty() {
            return;
        }
        for (m, t) in binding.iter() {
            self.sigma.bind(m, t.clone());
        }
        for s in &mut self.sequents {
            s.apply_subst(binding);
        }
    }

    /// Applies one application to the sequent it targets. The produced
    /// sequents take the target's place.
    pub fn apply(&self, app: &RuleApplication) -> Result<(MentalProofState, RuleApplication), ApplyError> {
        let idx = self
            .index_of(&app.target)
            .ok_or_else(|| ApplyError::NotApplicable(format!("{} on missing task {}", app.rule, app.target)))?;
        let mut fresh = self.fresh();
        let mut next = self.clone();
        let target = &self.sequents[idx];
        let (produced, done) = if app.kind == AppKind::Cut {
            if target.key() != app.target_key {
                return Err(ApplyError::Stale { rule: app.rule.clone(), label: target.label.clone() });
            }
            let mut done = app.clone();
            let mut kept = target.clone();
            kept.push_hyp(fresh.hyp(), app.conclusion.clone());
            let mut out = vec![kept];
            for (hyps, goal) in normalize_goal(&app.conclusion, &mut fresh) {
                let mut t = target.clone();
                t.label = fresh.task();
                t.goal = goal;
                for h in hyps {
                    t.push_hyp(fresh.hyp(), h);
                }
                done.produced.push(t.label.clone());
                out.push(t);
            }
            (out, done)
        } else {
            apply(app, target, &mut fresh)?
        };
        next.sequents.splice(idx..=idx, produced);
        if app.kind == AppKind::Axiom {
            next.bind(&app.binding);
        }
        next.next_task = fresh.next_task;
        next.next_hyp = fresh.next_hyp;
        if next.marked >= next.sequents.len() {
            next.marked = 0;
        }
        Ok((next, done))
    }
}

/// The exercise's starting state.
pub fn initial_states(ex: &Exercise) -> Vec<MentalProofState> {
    vec![MentalProofState::new(ex.goal.clone())]
}

pub fn close_check(state: &MentalProofState) -> bool {
    state.is_complete()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub depth: usize,
    pub width: usize,
    pub budget: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { depth: 4, width: 16, budget: 20_000 }
    }
}

impl SearchLimits {
    pub fn with_depth(depth: usize) -> Self {
        SearchLimits { depth, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    Rejected,
    Buggy { rule: String, message: String },
    ResourceExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpretation {
    Assume,
    Fact,
    Lemma,
    Subgoal,
    Cases,
    Trivial,
    Qed,
    Set,
}

/// The bookkeeping that completes a step after its inferences: global
/// bindings chosen by the student, renaming of fresh names to the student's,
/// and the new marked task.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Finish {
    pub binding: Subst,
    pub renaming: BTreeMap<String, Term>,
    pub marked: Option<String>,
    pub last_fact: Option<Formula>,
    pub abbreviations: Vec<(String, SetValue)>,
}

impl Finish {
    pub fn apply(&self, state: &MentalProofState) -> MentalProofState {
        let mut next = state.clone();
        next.bind(&self.binding);
        if !self.renaming.is_empty() {
            for s in &mut next.sequents {
                s.map_formulas(|f| replace_consts(f, &self.renaming));
            }
        }
        next.marked = self.marked.as_deref().and_then(|l| next.index_of(l)).unwrap_or(0);
        if self.last_fact.is_some() {
            next.last_fact = self.last_fact.clone();
        }
        next.abbreviations.extend(self.abbreviations.iter().cloned());
        next
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub trace: Vec<RuleApplication>,
    pub finish: Finish,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Successor {
    pub state: MentalProofState,
    pub segments: Vec<Segment>,
    pub interpretation: Interpretation,
    /// Hypotheses the step introduced, as matched in the successor.
    pub introduced: Vec<Formula>,
    /// Index of the predecessor in the input state list.
    pub origin: usize,
}

impl Successor {
    /// The filled-in inferences, in order.
    pub fn trace(&self) -> Vec<&RuleApplication> {
        self.segments.iter().flat_map(|s| s.trace.iter()).collect()
    }

    pub fn assertion_count(&self) -> usize {
        self.trace().iter().filter(|a| !a.is_structural()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionResult {
    pub verdict: Verdict,
    pub successors: Vec<Successor>,
    pub proof_complete: bool,
    pub expanded: usize,
}

impl ReconstructionResult {
    fn rejected(expanded: usize, exhausted: bool) -> Self {
        ReconstructionResult {
            verdict: if exhausted { Verdict::ResourceExhausted } else { Verdict::Rejected },
            successors: Vec::new(),
            proof_complete: false,
            expanded,
        }
    }
}

/// Re-applies a successor's segments to its predecessor.
pub fn replay(pre: &MentalProofState, succ: &Successor) -> Result<MentalProofState, ApplyError> {
    let mut state = pre.clone();
    for seg in &succ.segments {
        for app in &seg.trace {
            state = state.apply(app)?.0;
        }
        state = seg.finish.apply(&state);
    }
    state.history.extend(succ.trace().into_iter().cloned());
    Ok(state)
}

#[derive(Clone, Debug)]
struct Node {
    state: MentalProofState,
    trace: Vec<RuleApplication>,
    active: BTreeSet<String>,
    parent: BTreeMap<String, String>,
    buggy: usize,
    /// Tasks of this search closed by the axiom rule, as they were before closing.
    closed: Vec<Sequent>,
}

impl Node {
    fn root(state: &MentalProofState, active: BTreeSet<String>) -> Self {
        Node { state: state.clone(), trace: Vec::new(), active, parent: BTreeMap::new(), buggy: 0, closed: Vec::new() }
    }

    fn step(&self, app: &RuleApplication) -> Option<Node> {
        let (state, done) = self.state.apply(app).ok()?;
        let mut node = Node {
            state,
            trace: self.trace.clone(),
            active: self.active.clone(),
            parent: self.parent.clone(),
            buggy: self.buggy + usize::from(app.is_buggy),
            closed: self.closed.clone(),
        };
        node.active.remove(&app.target);
        for p in &done.produced {
            node.active.insert(p.clone());
            node.parent.insert(p.clone(), app.target.clone());
        }
        if app.kind == AppKind::Cut {
            node.active.remove(&app.target);
        }
        let produced = done.produced.clone();
        node.trace.push(done);
        for label in produced {
            node = node.auto_close(&label);
        }
        Some(node)
    }

    fn auto_close(self, label: &str) -> Node {
        let Some(idx) = self.state.index_of(label) else { return self };
        match deepaxiom_application(&self.state.sequents[idx]) {
            Some(app) => match self.state.apply(&app) {
                Ok((state, done)) => {
                    let mut node = self;
                    node.closed.push(node.state.sequents[idx].clone());
                    node.state = state;
                    node.active.remove(label);
                    node.trace.push(done);
                    node
                }
                Err(_) => self,
            },
            None => self,
        }
    }

    fn open_active(&self) -> Vec<&Sequent> {
        self.state.sequents.iter().filter(|s| self.active.contains(&s.label)).collect()
    }

    fn ancestors(&self, label: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::from([label.to_string()]);
        let mut cur = label;
        while let Some(p) = self.parent.get(cur) {
            out.insert(p.clone());
            cur = p;
        }
        out
    }

    fn key(&self) -> String {
        format!("{}|{}", self.state.key(), self.buggy)
    }
}

const FRESH_PREFIX: char = '%';
const PATTERN_PREFIX: char = '&';

/// Unification of student formulas against candidates, where the names
/// invented during this step may be renamed to the student's names.
struct Matcher {
    lift: BTreeMap<String, Term>,
    fresh: BTreeSet<String>,
    taken: BTreeSet<String>,
}

impl Matcher {
    fn new(pre: &MentalProofState, node: &Node) -> Self {
        let before = pre.consts();
        let mut now = node.state.consts();
        now.extend(node.closed.iter().flat_map(Sequent::consts));
        let fresh: BTreeSet<String> = now.difference(&before).cloned().collect();
        let lift = fresh.iter().map(|c| (c.clone(), Term::Meta(format!("{FRESH_PREFIX}{c}")))).collect();
        let mut taken = before;
        taken.extend(now);
        Matcher { lift, fresh, taken }
    }

    fn variants(student: &Formula) -> Vec<Formula> {
        let mut out = vec![student.clone()];
        let mut f = student.clone();
        let mut n = 0;
        while let Formula::Exists(x, body) = &f {
            n += 1;
            f = instantiate(body, x, &Term::Meta(format!("{PATTERN_PREFIX}{x}{n}")));
        }
        if n > 0 {
            out.push(f);
        }
        out
    }

    fn unify(&self, student: &Formula, cand: &Formula, acc: &Subst) -> Option<Subst> {
        let lifted = replace_consts(cand, &self.lift);
        Self::variants(student).into_iter().find_map(|v| {
            let mut s = acc.clone();
            (unify_with(&v, &lifted, &mut s) && self.valid(&s)).then_some(s)
        })
    }

    fn valid(&self, s: &Subst) -> bool {
        let mut targets = BTreeSet::new();
        for c in &self.fresh {
            match s.get(&format!("{FRESH_PREFIX}{c}")) {
                None => {}
                Some(Term::Const(t)) => {
                    if (t != c && self.taken.contains(t)) || !targets.insert(t.clone()) {
                        return false;
                    }
                }
                Some(_) => return false,
            }
        }
        true
    }

    /// Assigns each student formula to a distinct candidate.
    fn assign(&self, students: &[Formula], cands: &[Formula], used: &mut Vec<bool>, acc: Subst) -> Option<Subst> {
        let Some((first, rest)) = students.split_first() else { return Some(acc) };
        for (i, c) in cands.iter().enumerate() {
            if used[i] {
                continue;
            }
            if let Some(s) = self.unify(first, c, &acc) {
                used[i] = true;
                if let Some(done) = self.assign(rest, cands, used, s) {
                    return Some(done);
                }
                used[i] = false;
            }
        }
        None
    }

    fn finish(&self, s: &Subst, marked: Option<String>) -> Finish {
        let mut renaming = BTreeMap::new();
        for c in &self.fresh {
            if let Some(Term::Const(t)) = s.get(&format!("{FRESH_PREFIX}{c}")) {
                if t != c {
                    renaming.insert(c.clone(), Term::cnst(t));
                }
            }
        }
        let lower: BTreeMap<String, Term> = self
            .fresh
            .iter()
            .map(|c| (format!("{FRESH_PREFIX}{c}"), Term::cnst(c)))
            .collect();
        let mut binding = Subst::new();
        for (m, t) in s.iter() {
            if m.starts_with(FRESH_PREFIX) || m.starts_with(PATTERN_PREFIX) {
                continue;
            }
            let t = lower_metas(t, &lower);
            let mut metas = BTreeSet::new();
            t.collect_metas(&mut metas);
            if metas.iter().any(|x| x.starts_with(PATTERN_PREFIX) || x.starts_with(FRESH_PREFIX)) {
                continue;
            }
            binding.bind(m, t);
        }
        Finish { binding, renaming, marked, ..Finish::default() }
    }
}

fn lower_metas(t: &Term, map: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Meta(m) => map.get(m).cloned().unwrap_or_else(|| t.clone()),
        Term::Pair(a, b) => Term::pair(lower_metas(a, map), lower_metas(b, map)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| lower_metas(a, map)).collect()),
        other => other.clone(),
    }
}

fn expand(f: &Formula, state: &MentalProofState) -> Formula {
    let map: BTreeMap<String, Term> = state
        .abbreviations
        .iter()
        .filter_map(|(n, v)| match v {
            SetValue::Term(t) => Some((n.clone(), t.clone())),
            SetValue::Formula(_) => None,
        })
        .collect();
    state.sigma.apply(&replace_consts(f, &map))
}

/// What a student step asks the search to find.
enum Goal {
    Assume { hyps: Vec<Formula>, thus: Option<Formula> },
    Fact(Formula),
    Lemma,
    Subgoals { goals: Vec<Formula>, using: Vec<Vec<Formula>> },
    Cases(Vec<Formula>),
    Closed,
}

struct Found {
    node: Node,
    finish: Finish,
    interpretation: Interpretation,
    introduced: Vec<Formula>,
    split: Option<Vec<String>>,
}

struct Search<'a> {
    rules: &'a RuleSet,
    limits: SearchLimits,
    spent: usize,
    exhausted: bool,
}

impl Search<'_> {
    fn check(&self, pre: &MentalProofState, pre_labels: &BTreeSet<String>, node: &Node, goal: &Goal, buggy: bool) -> Vec<Found> {
        if buggy && node.buggy != 1 {
            return Vec::new();
        }
        let m = Matcher::new(pre, node);
        let mut out = Vec::new();
        match goal {
            Goal::Assume { hyps, thus } => {
                for s in node.open_active().into_iter().chain(&node.closed) {
                    let fresh_hyps: Vec<Formula> =
                        s.hyps.iter().filter(|h| !pre_labels.contains(&h.label)).map(|h| h.formula.clone()).collect();
                    if fresh_hyps.len() < hyps.len() {
                        continue;
                    }
                    let Some(mut acc) = m.assign(hyps, &fresh_hyps, &mut vec![false; fresh_hyps.len()], Subst::new()) else {
                        continue;
                    };
                    if let Some(t) = thus {
                        match m.unify(t, &s.goal, &acc) {
                            Some(a) => acc = a,
                            None => continue,
                        }
                    }
                    let introduced = hyps.iter().map(|h| acc.apply(h)).collect();
                    out.push(Found {
                        node: node.clone(),
                        finish: m.finish(&acc, Some(s.label.clone())),
                        interpretation: Interpretation::Assume,
                        introduced,
                        split: None,
                    });
                }
            }
            Goal::Fact(f) => {
                for s in node.open_active() {
                    let lineage = node.ancestors(&s.label);
                    let mut cands: Vec<Formula> =
                        s.hyps.iter().filter(|h| !pre_labels.contains(&h.label)).map(|h| h.formula.clone()).collect();
                    for app in &node.trace {
                        if app.kind == AppKind::Assertion
                            && app.direction == crate::rules::Direction::Forward
                            && app.produced.iter().any(|p| lineage.contains(p))
                        {
                            cands.push(app.conclusion.clone());
                        }
                    }
                    for c in &cands {
                        if let Some(acc) = m.unify(f, c, &Subst::new()) {
                            let fin = m.finish(&acc, Some(s.label.clone()));
                            out.push(Found {
                                node: node.clone(),
                                finish: Finish { last_fact: Some(f.clone()), ..fin },
                                interpretation: Interpretation::Fact,
                                introduced: vec![f.clone()],
                                split: None,
                            });
                            break;
                        }
                    }
                }
                for s in node.open_active() {
                    if let Some(acc) = m.unify(f, &s.goal, &Subst::new()) {
                        let fin = m.finish(&acc, Some(s.label.clone()));
                        out.push(Found {
                            node: node.clone(),
                            finish: Finish { last_fact: Some(f.clone()), ..fin },
                            interpretation: Interpretation::Subgoal,
                            introduced: Vec::new(),
                            split: None,
                        });
                    }
                }
            }
            Goal::Subgoals { goals, using } => {
                let open = node.open_active();
                let goal_forms: Vec<Formula> = open.iter().map(|s| s.goal.clone()).collect();
                let mut used = vec![false; goal_forms.len()];
                if let Some(mut acc) = m.assign(goals, &goal_forms, &mut used, Subst::new()) {
                    let mut ok = true;
                    for (g, us) in goals.iter().zip(using) {
                        let Some(i) = (0..open.len()).find(|&i| used[i] && m.unify(g, &open[i].goal, &acc).is_some()) else {
                            ok = false;
                            break;
                        };
                        let hs: Vec<Formula> = open[i].hyps.iter().map(|h| h.formula.clone()).collect();
                        let mut all = vec![false; hs.len()];
                        for u in us {
                            match hs.iter().enumerate().find_map(|(k, h)| if all[k] { None } else { m.unify(u, h, &acc).map(|a| (k, a)) }) {
                                Some((k, a)) => {
                                    all[k] = true;
                                    acc = a;
                                }
                                None => ok = false,
                            }
                        }
                    }
                    if ok {
                        let first = open.iter().find(|s| m.unify(&goals[0], &s.goal, &acc).is_some()).map(|s| s.label.clone());
                        out.push(Found {
                            node: node.clone(),
                            finish: m.finish(&acc, first),
                            interpretation: Interpretation::Subgoal,
                            introduced: Vec::new(),
                            split: None,
                        });
                    }
                }
            }
            Goal::Cases(cases) => {
                for s in node.open_active() {
                    for h in &s.hyps {
                        let Some(app) = or_l_on(s, &h.label) else { continue };
                        let Some(split) = node.step(&app) else { continue };
                        let Some(done) = split.trace.last() else { continue };
                        if done.kind != AppKind::OrL || done.produced.len() != cases.len() {
                            continue;
                        }
                        let branches = done.produced.clone();
                        let m2 = Matcher::new(pre, &split);
                        let mut acc = Some(Subst::new());
                        for (case, label) in cases.iter().zip(&branches) {
                            let Some(bs) = split.state.index_of(label).map(|i| &split.state.sequents[i]) else {
                                // a branch closed by the axiom rule right away
                                continue;
                            };
                            let new: Vec<Formula> =
                                bs.hyps.iter().filter(|x| !pre_labels.contains(&x.label)).map(|x| x.formula.clone()).collect();
                            acc = acc.and_then(|a| new.iter().find_map(|c| m2.unify(case, c, &a)));
                        }
                        if let Some(acc) = acc {
                            out.push(Found {
                                finish: m2.finish(&acc, branches.first().cloned()),
                                node: split,
                                interpretation: Interpretation::Cases,
                                introduced: cases.clone(),
                                split: Some(branches),
                            });
                        }
                    }
                }
            }
            Goal::Lemma | Goal::Closed => {
                if node.open_active().is_empty() {
                    out.push(Found {
                        node: node.clone(),
                        finish: Finish::default(),
                        interpretation: Interpretation::Trivial,
                        introduced: Vec::new(),
                        split: None,
                    });
                }
            }
        }
        out
    }

    fn expand(&mut self, node: &Node, filter: &RuleFilter, buggy: bool) -> Vec<Node> {
        let mut out = Vec::new();
        for s in node.open_active() {
            for app in applicable_rules(s, self.rules, filter) {
                if app.is_buggy && (!buggy || node.buggy >= 1) {
                    continue;
                }
                if self.spent >= self.limits.budget {
                    self.exhausted = true;
                    return out;
                }
                self.spent += 1;
                if let Some(n) = node.step(&app) {
                    out.push(n);
                }
            }
        }
        out
    }

    /// Breadth-first search from `root`, stopping at the first level where
    /// the step's filter matches.
    fn run(&mut self, pre: &MentalProofState, root: Node, goal: &Goal, buggy: bool) -> Vec<Found> {
        let pre_labels = pre.hyp_labels();
        let filter = if buggy { RuleFilter::all().with_buggy() } else { RuleFilter::all() };
        let mut seen: HashSet<String> = HashSet::new();
        seen.insert(root.key());
        let mut level = vec![root];
        for depth in 0..=self.limits.depth {
            let found: Vec<Found> = level.iter().flat_map(|n| self.check(pre, &pre_labels, n, goal, buggy)).collect();
            if !found.is_empty() || depth == self.limits.depth {
                return found;
            }
            let mut next = Vec::new();
            for n in &level {
                for child in self.expand(n, &filter, buggy) {
                    if seen.insert(child.key()) {
                        next.push(child);
                    }
                }
                if self.exhausted {
                    return Vec::new();
                }
            }
            if next.is_empty() {
                return Vec::new();
            }
            level = next;
        }
        Vec::new()
    }
}

fn closure_root(state: &MentalProofState, active: BTreeSet<String>) -> Node {
    let mut node = Node::root(state, active.clone());
    for label in active {
        node = node.auto_close(&label);
    }
    node
}

fn lemma_root(state: &MentalProofState, focus: &Sequent, lemma: &Formula) -> Option<(Node, Formula)> {
    let known = state.consts();
    let mut free: Vec<String> = lemma.consts().into_iter().filter(|c| !known.contains(c)).collect();
    free.sort();
    let mut general = lemma.clone();
    for c in free.iter().rev() {
        let map = BTreeMap::from([(c.clone(), Term::var(c))]);
        general = Formula::forall(c, replace_consts(&general, &map));
    }
    let app = cut_application(focus, &general);
    let root = Node::root(state, BTreeSet::new());
    let node = root.step(&app)?;
    Some((node, general))
}

struct Step<'a> {
    pre: &'a MentalProofState,
    origin: usize,
}

fn successor_of(step: &Step<'_>, found: Found) -> Successor {
    let mut state = found.finish.apply(&found.node.state);
    state.history.extend(found.node.trace.iter().cloned());
    let introduced = found.introduced.iter().map(|f| replace_consts(f, &found.finish.renaming)).collect();
    Successor {
        state,
        segments: vec![Segment { trace: found.node.trace, finish: found.finish }],
        interpretation: found.interpretation,
        introduced,
        origin: step.origin,
    }
}

fn focus_order(state: &MentalProofState, any: bool) -> Vec<usize> {
    let mut order = vec![state.marked];
    if any {
        order.extend((0..state.sequents.len()).filter(|i| *i != state.marked));
    }
    order
}

fn search_state(
    step: &Step<'_>,
    proof_step: &ProofStep,
    search: &mut Search<'_>,
    buggy: bool,
    theory: &Theory,
) -> Vec<Successor> {
    let state = step.pre;
    if state.sequents.is_empty() {
        return Vec::new();
    }
    let x = |f: &Formula| expand(f, state);
    let run_focus = |search: &mut Search<'_>, goal: Goal, any: bool| -> Vec<Successor> {
        for i in focus_order(state, any) {
            let label = state.sequents[i].label.clone();
            let root = Node::root(state, BTreeSet::from([label]));
            let found = search.run(state, root, &goal, buggy);
            if !found.is_empty() {
                return found.into_iter().map(|f| successor_of(step, f)).collect();
            }
            if search.exhausted {
                break;
            }
        }
        Vec::new()
    };
    match proof_step {
        ProofStep::Assume { hyps, thus, .. } => {
            let goal = Goal::Assume { hyps: hyps.iter().map(x).collect(), thus: thus.as_ref().map(x) };
            run_focus(search, goal, true)
        }
        ProofStep::Fact { form, .. } => {
            let Some(f) = form.resolve(state.last_fact.as_ref()) else { return Vec::new() };
            let f = x(&f);
            let direct = run_focus(search, Goal::Fact(f.clone()), false);
            if !direct.is_empty() || search.exhausted {
                return direct;
            }
            let focus = &state.sequents[state.marked];
            let Some((root, general)) = lemma_root(state, focus, &f) else { return Vec::new() };
            let marked = focus.label.clone();
            search
                .run(state, root, &Goal::Lemma, buggy)
                .into_iter()
                .map(|found| {
                    let found = Found {
                        finish: Finish { marked: Some(marked.clone()), last_fact: Some(f.clone()), ..Finish::default() },
                        interpretation: Interpretation::Lemma,
                        introduced: vec![general.clone()],
                        ..found
                    };
                    successor_of(step, found)
                })
                .collect()
        }
        ProofStep::Subgoal(g) => {
            let goal = Goal::Subgoals { goals: vec![x(&g.formula)], using: vec![g.using.iter().map(x).collect()] };
            run_focus(search, goal, true)
        }
        ProofStep::Subgoals { goals, .. } => {
            let goal = Goal::Subgoals {
                goals: goals.iter().map(|g| x(&g.formula)).collect(),
                using: goals.iter().map(|g| g.using.iter().map(x).collect()).collect(),
            };
            run_focus(search, goal, true)
        }
        ProofStep::Cases { cases, .. } => {
            let goal = Goal::Cases(cases.iter().map(|c| x(&c.hyp)).collect());
            let mut out = Vec::new();
            for i in focus_order(state, true) {
                let root = Node::root(state, BTreeSet::from([state.sequents[i].label.clone()]));
                let found = search.run(state, root, &goal, buggy);
                for f in found {
                    if let Some(s) = continue_cases(step, f, cases, search, theory) {
                        out.push(s);
                    }
                }
                if !out.is_empty() || search.exhausted {
                    break;
                }
            }
            out
        }
        ProofStep::Trivial { .. } | ProofStep::Qed => {
            let qed = matches!(proof_step, ProofStep::Qed);
            let active: BTreeSet<String> = if qed {
                state.sequents.iter().map(|s| s.label.clone()).collect()
            } else {
                BTreeSet::from([state.sequents[state.marked].label.clone()])
            };
            let root = closure_root(state, active);
            search
                .run(state, root, &Goal::Closed, buggy)
                .into_iter()
                .map(|f| {
                    let mut s = successor_of(step, f);
                    s.interpretation = if qed { Interpretation::Qed } else { Interpretation::Trivial };
                    s
                })
                .collect()
        }
        ProofStep::Set(binds) => {
            let finish = Finish {
                marked: state.marked_sequent().map(|s| s.label.clone()),
                abbreviations: binds.clone(),
                ..Finish::default()
            };
            let found = Found {
                node: Node::root(state, BTreeSet::new()),
                finish,
                interpretation: Interpretation::Set,
                introduced: Vec::new(),
                split: None,
            };
            vec![successor_of(step, found)]
        }
    }
}

/// Runs each case's nested steps on its branch, in order.
fn continue_cases(
    step: &Step<'_>,
    found: Found,
    cases: &[crate::script::Case],
    search: &mut Search<'_>,
    theory: &Theory,
) -> Option<Successor> {
    let branches = found.split.clone().unwrap_or_default();
    let mut succ = successor_of(step, found);
    for (case, label) in cases.iter().zip(&branches) {
        if succ.state.index_of(label).is_none() {
            continue;
        }
        let mark = Finish { marked: Some(label.clone()), ..Finish::default() };
        succ.state = mark.apply(&succ.state);
        succ.segments.push(Segment { trace: Vec::new(), finish: mark });
        for inner in &case.steps {
            let pre = succ.state.clone();
            let sub = Step { pre: &pre, origin: 0 };
            let next = search_state(&sub, inner, search, false, theory).into_iter().next()?;
            succ.state = next.state;
            succ.segments.extend(next.segments);
        }
    }
    Some(succ)
}

fn rank_and_trim(mut succs: Vec<Successor>, width: usize) -> Vec<Successor> {
    let mut seen = HashSet::new();
    succs.retain(|s| seen.insert((s.state.key(), s.interpretation)));
    succs.sort_by_key(Successor::assertion_count);
    succs.truncate(width);
    succs
}

/// Verifies one student step against the live proof states.
pub fn reconstruct_step(
    states: &[MentalProofState],
    step: &ProofStep,
    theory: &Theory,
    limits: SearchLimits,
) -> ReconstructionResult {
    let rules = RuleSet::from_theory(theory);
    let has_buggy = rules.rules.iter().any(|r| r.is_buggy);
    let mut search = Search { rules: &rules, limits, spent: 0, exhausted: false };
    let mut succs = Vec::new();
    for (origin, pre) in states.iter().enumerate() {
        let s = Step { pre, origin };
        succs.extend(search_state(&s, step, &mut search, false, theory));
    }
    if !succs.is_empty() {
        let successors = rank_and_trim(succs, limits.width);
        let proof_complete = successors.first().is_some_and(|s| s.state.is_complete());
        return ReconstructionResult { verdict: Verdict::Verified, successors, proof_complete, expanded: search.spent };
    }
    let exhausted = search.exhausted;
    if has_buggy && !exhausted {
        for (origin, pre) in states.iter().enumerate() {
            let s = Step { pre, origin };
            let found = search_state(&s, step, &mut search, true, theory);
            if let Some(app) = found.iter().flat_map(|f| f.trace()).find(|a| a.is_buggy) {
                let message = theory.assertion(&app.concept).and_then(|a| a.message.clone()).unwrap_or_default();
                return ReconstructionResult {
                    verdict: Verdict::Buggy { rule: app.concept.clone(), message },
                    successors: Vec::new(),
                    proof_complete: false,
                    expanded: search.spent,
                };
            }
        }
    }
    ReconstructionResult::rejected(search.spent, exhausted || search.exhausted)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relevance {
    Relevant,
    Irrelevant,
    Unknown,
}

/// Whether each hypothesis unifies with one occurring in the plan the
/// strategy finds from the state's marked task.
pub fn check_relevance(
    state: &MentalProofState,
    hyps: &[Formula],
    strategy: &str,
    theory: &Theory,
    budget: usize,
) -> Relevance {
    let Some(task) = state.marked_sequent() else { return Relevance::Unknown };
    let rules = RuleSet::from_theory(&theory_without_bugs(theory));
    let outcome = run_strategy_from(strategy, task, &theory.strategies, &rules, state.fresh(), budget);
    if outcome.exhausted {
        return Relevance::Unknown;
    }
    let Some(plan) = outcome.plan else { return Relevance::Irrelevant };
    let known = state.consts();
    let lift: BTreeMap<String, Term> = plan
        .nodes
        .iter()
        .flat_map(|n| n.sequent.consts())
        .filter(|c| !known.contains(c))
        .map(|c| (c.clone(), Term::Meta(format!("{FRESH_PREFIX}{c}"))))
        .collect();
    let pool: Vec<Formula> = plan.hypotheses().iter().map(|f| replace_consts(f, &lift)).collect();
    let own: BTreeMap<String, Term> = hyps
        .iter()
        .flat_map(Formula::consts)
        .filter(|c| !known.contains(c))
        .map(|c| (c.clone(), Term::Meta(format!("{FRESH_PREFIX}h{c}"))))
        .collect();
    let all = hyps.iter().map(|h| replace_consts(h, &own)).all(|h| {
        pool.iter().any(|p| {
            let mut s = Subst::new();
            unify_with(&h, p, &mut s)
        })
    });
    if all {
        Relevance::Relevant
    } else {
        Relevance::Irrelevant
    }
}

fn theory_without_bugs(theory: &Theory) -> Theory {
    let mut t = theory.clone();
    t.assertions.retain(|a| a.kind != crate::theory::AssertionKind::Buggy);
    t
}

//! Step-size judgement: features of a reconstruction trace, classifiers
//! over them, and the overlay student model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::rules::{Direction, RuleApplication};
use crate::script::ProofStep;

pub const FEATURES: [&str; 6] = ["total", "mcu", "unmastered", "hypintro", "relations", "verbalized"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GranularityFeatures {
    pub total: u32,
    pub mcu: u32,
    pub unmastered: u32,
    pub hypintro: u32,
    pub relations: u32,
    pub verbalized: bool,
}

impl GranularityFeatures {
    pub fn get(&self, feature: &str) -> Option<u32> {
        Some(match feature {
            "total" => self.total,
            "mcu" => self.mcu,
            "unmastered" => self.unmastered,
            "hypintro" => self.hypintro,
            "relations" => self.relations,
            "verbalized" => u32::from(self.verbalized),
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Appropriate,
    TooSmall,
    TooBig,
}

impl Granularity {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "appropriate" | "app" => Some(Granularity::Appropriate),
            "too_small" => Some(Granularity::TooSmall),
            "too_big" => Some(Granularity::TooBig),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Appropriate => "appropriate",
            Granularity::TooSmall => "too_small",
            Granularity::TooBig => "too_big",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GranularityVerdict {
    pub verdict: Granularity,
    pub features: GranularityFeatures,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConceptState {
    pub mastered: bool,
    pub correct_uses: u32,
}

/// Per-concept mastery, growing with correct uses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StudentModel {
    pub threshold: u32,
    pub concepts: BTreeMap<String, ConceptState>,
}

impl StudentModel {
    pub fn new(threshold: u32) -> Self {
        StudentModel { threshold: threshold.max(1), concepts: BTreeMap::new() }
    }

    pub fn is_mastered(&self, concept: &str) -> bool {
        self.concepts.get(concept).is_some_and(|c| c.mastered)
    }

    pub fn mastered(&self) -> BTreeSet<String> {
        self.concepts.iter().filter(|(_, c)| c.mastered).map(|(k, _)| k.clone()).collect()
    }

    /// Counts one correct use for every concept applied in a verified step.
    pub fn update(&mut self, trace: &[&RuleApplication]) {
        let concepts: BTreeSet<&str> = trace.iter().filter(|a| !a.is_structural()).map(|a| a.concept.as_str()).collect();
        for c in concepts {
            let st = self.concepts.entry(c.to_string()).or_default();
            st.correct_uses += 1;
            if st.correct_uses >= self.threshold {
                st.mastered = true;
            }
        }
    }
}

impl Default for StudentModel {
    fn default() -> Self {
        StudentModel::new(crate::theory::DEFAULT_MASTERY)
    }
}

pub fn update_student_model(model: &StudentModel, trace: &[&RuleApplication], verified: bool) -> StudentModel {
    let mut next = model.clone();
    if verified {
        next.update(trace);
    }
    next
}

pub fn extract_features(trace: &[&RuleApplication], model: &StudentModel, step: &ProofStep) -> GranularityFeatures {
    let apps: Vec<&&RuleApplication> = trace.iter().filter(|a| !a.is_structural()).collect();
    let concepts: BTreeSet<&str> = apps.iter().map(|a| a.concept.as_str()).collect();
    GranularityFeatures {
        total: apps.len() as u32,
        mcu: apps.iter().filter(|a| model.is_mastered(&a.concept)).count() as u32,
        unmastered: concepts.iter().filter(|c| !model.is_mastered(c)).count() as u32,
        hypintro: apps.iter().filter(|a| a.direction == Direction::Backward).map(|a| a.hyp_intro as u32).sum(),
        relations: concepts.len() as u32,
        verbalized: step.justification().is_some_and(|by| concepts.contains(by)),
    }
}

/// A closed interval of feature values; `hi = None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guard {
    pub lo: u32,
    pub hi: Option<u32>,
}

impl Guard {
    pub fn contains(&self, v: u32) -> bool {
        v >= self.lo && self.hi.is_none_or(|h| v <= h)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            None if self.lo == 0 => write!(f, "(>= 0)"),
            None => write!(f, "(> {})", self.lo - 1),
            Some(h) if h == self.lo => write!(f, "(= {h})"),
            Some(h) if self.lo == 0 => write!(f, "(<= {h})"),
            Some(h) => write!(f, "(in {} {h})", self.lo),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Leaf(Granularity),
    Node { feature: String, branches: Vec<(Guard, Tree)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Cmp { feature: String, guard: Guard },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub verdict: Granularity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearClass {
    pub verdict: Granularity,
    pub bias: f64,
    pub weights: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GranularityClassifier {
    Tree(Tree),
    Rules { rules: Vec<Rule>, default: Granularity },
    Linear { classes: Vec<LinearClass>, default: Granularity },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("unknown verdict '{0}'")]
    UnknownVerdict(String),
    #[error("guards on '{feature}' {problem}")]
    Guards { feature: String, problem: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

pub fn classify(f: &GranularityFeatures, c: &GranularityClassifier) -> GranularityVerdict {
    let verdict = match c {
        GranularityClassifier::Tree(t) => descend(t, f),
        GranularityClassifier::Rules { rules, default } => rules
            .iter()
            .find(|r| {
                r.conditions.iter().all(|Condition::Cmp { feature, guard }| guard.contains(f.get(feature).unwrap_or(0)))
            })
            .map_or(*default, |r| r.verdict),
        GranularityClassifier::Linear { classes, default } => {
            let mut best: Option<(f64, Granularity)> = None;
            for cl in classes {
                let score = cl.bias
                    + cl.weights.iter().map(|(k, w)| w * f64::from(f.get(k).unwrap_or(0))).sum::<f64>();
                if score > 0.0 && best.is_none_or(|(b, _)| score > b) {
                    best = Some((score, cl.verdict));
                }
            }
            best.map_or(*default, |(_, v)| v)
        }
    };
    GranularityVerdict { verdict, features: *f }
}

fn descend(t: &Tree, f: &GranularityFeatures) -> Granularity {
    match t {
        Tree::Leaf(v) => *v,
        Tree::Node { feature, branches } => {
            let v = f.get(feature).unwrap_or(0);
            let (_, sub) = branches.iter().find(|(g, _)| g.contains(v)).expect("guards validated as total");
            descend(sub, f)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Sx {
    Atom(String, usize),
    List(Vec<Sx>, usize),
}

impl Sx {
    fn line(&self) -> usize {
        match self {
            Sx::Atom(_, l) | Sx::List(_, l) => *l,
        }
    }
}

fn sx_tokens(text: &str) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let spaced = line.replace('(', " ( ").replace(')', " ) ");
        out.extend(spaced.split_whitespace().map(|t| (t.to_string(), n + 1)));
    }
    out
}

fn sx_parse(toks: &[(String, usize)], pos: &mut usize) -> Result<Sx, ClassifierError> {
    let Some((tok, line)) = toks.get(*pos) else {
        let line = toks.last().map_or(1, |t| t.1);
        return Err(ClassifierError::Syntax { line, message: "unexpected end of input".into() });
    };
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match toks.get(*pos) {
                    Some((t, _)) if t == ")" => {
                        *pos += 1;
                        return Ok(Sx::List(items, *line));
                    }
                    Some(_) => items.push(sx_parse(toks, pos)?),
                    None => return Err(ClassifierError::Syntax { line: *line, message: "unclosed '('".into() }),
                }
            }
        }
        ")" => Err(ClassifierError::Syntax { line: *line, message: "unexpected ')'".into() }),
        _ => Ok(Sx::Atom(tok.clone(), *line)),
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ClassifierError {
    ClassifierError::Syntax { line, message: message.into() }
}

fn number(s: &str, line: usize) -> Result<u32, ClassifierError> {
    s.parse().map_err(|_| syntax(line, format!("expected a number, found '{s}'")))
}

fn guard_of(op: &str, args: &[&str], line: usize) -> Result<Guard, ClassifierError> {
    let n = |i: usize| -> Result<u32, ClassifierError> {
        number(args.get(i).ok_or_else(|| syntax(line, format!("'{op}' needs an argument")))?, line)
    };
    let g = match op {
        "<=" => Guard { lo: 0, hi: Some(n(0)?) },
        "<" => {
            let v = n(0)?;
            if v == 0 {
                return Err(syntax(line, "'< 0' matches nothing"));
            }
            Guard { lo: 0, hi: Some(v - 1) }
        }
        "=" => {
            let v = n(0)?;
            Guard { lo: v, hi: Some(v) }
        }
        ">" => Guard { lo: n(0)? + 1, hi: None },
        ">=" => Guard { lo: n(0)?, hi: None },
        "in" => {
            let (a, b) = (n(0)?, n(1)?);
            if a > b {
                return Err(syntax(line, format!("empty range {a}..{b}")));
            }
            Guard { lo: a, hi: Some(b) }
        }
        _ => return Err(syntax(line, format!("unknown guard '{op}'"))),
    };
    Ok(g)
}

fn check_feature(name: &str) -> Result<(), ClassifierError> {
    if FEATURES.contains(&name) {
        Ok(())
    } else {
        Err(ClassifierError::UnknownFeature(name.to_string()))
    }
}

fn verdict_of(name: &str) -> Result<Granularity, ClassifierError> {
    Granularity::parse(name).ok_or_else(|| ClassifierError::UnknownVerdict(name.to_string()))
}

/// Guards must partition the non-negative integers.
fn check_partition(feature: &str, guards: &[Guard]) -> Result<(), ClassifierError> {
    let mut sorted = guards.to_vec();
    sorted.sort_by_key(|g| g.lo);
    let mut next = 0u32;
    for g in &sorted {
        if g.lo < next {
            return Err(ClassifierError::Guards { feature: feature.into(), problem: format!("overlap at {}", g.lo) });
        }
        if g.lo > next {
            return Err(ClassifierError::Guards { feature: feature.into(), problem: format!("leave {next} uncovered") });
        }
        match g.hi {
            None => {
                if sorted.last() != Some(g) {
                    return Err(ClassifierError::Guards {
                        feature: feature.into(),
                        problem: "overlap after an unbounded guard".into(),
                    });
                }
                return Ok(());
            }
            Some(h) => next = h + 1,
        }
    }
    Err(ClassifierError::Guards { feature: feature.into(), problem: format!("leave {next} and above uncovered") })
}

fn atom(sx: &Sx) -> Result<&str, ClassifierError> {
    match sx {
        Sx::Atom(a, _) => Ok(a),
        Sx::List(_, l) => Err(syntax(*l, "expected a word, found a list")),
    }
}

fn tree_of(sx: &Sx) -> Result<Tree, ClassifierError> {
    let Sx::List(items, line) = sx else { return Err(syntax(sx.line(), "expected '(node ...)' or '(leaf ...)'")) };
    match items.first().map(atom).transpose()? {
        Some("leaf") => {
            let v = items.get(1).ok_or_else(|| syntax(*line, "leaf needs a verdict"))?;
            Ok(Tree::Leaf(verdict_of(atom(v)?)?))
        }
        Some("node") => {
            let feature = atom(items.get(1).ok_or_else(|| syntax(*line, "node needs a feature"))?)?.to_string();
            check_feature(&feature)?;
            let mut branches = Vec::new();
            for b in &items[2..] {
                let Sx::List(parts, bl) = b else { return Err(syntax(b.line(), "expected '(guard subtree)'")) };
                let [g, sub] = parts.as_slice() else { return Err(syntax(*bl, "expected '(guard subtree)'")) };
                let Sx::List(gs, gl) = g else { return Err(syntax(g.line(), "expected a guard list")) };
                let words: Vec<&str> = gs.iter().map(atom).collect::<Result<_, _>>()?;
                let (op, args) = words.split_first().ok_or_else(|| syntax(*gl, "empty guard"))?;
                branches.push((guard_of(op, args, *gl)?, tree_of(sub)?));
            }
            let guards: Vec<Guard> = branches.iter().map(|(g, _)| *g).collect();
            check_partition(&feature, &guards)?;
            Ok(Tree::Node { feature, branches })
        }
        _ => Err(syntax(*line, "expected 'node' or 'leaf'")),
    }
}

fn parse_tree(text: &str) -> Result<GranularityClassifier, ClassifierError> {
    let toks = sx_tokens(text);
    let mut pos = 0;
    let sx = sx_parse(&toks, &mut pos)?;
    if let Some((t, l)) = toks.get(pos) {
        return Err(syntax(*l, format!("trailing input '{t}'")));
    }
    Ok(GranularityClassifier::Tree(tree_of(&sx)?))
}

/// `if <feature> <op> <n> [and ...] then <verdict>` lines, closed by `default <verdict>`.
fn parse_rules(lines: &[(usize, &str)]) -> Result<GranularityClassifier, ClassifierError> {
    let mut rules = Vec::new();
    let mut default = None;
    for &(line, text) in lines {
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.first() {
            Some(&"default") => {
                let v = words.get(1).ok_or_else(|| syntax(line, "default needs a verdict"))?;
                default = Some(verdict_of(v)?);
            }
            Some(&"if") => {
                let then = words.iter().position(|w| *w == "then").ok_or_else(|| syntax(line, "missing 'then'"))?;
                let verdict = verdict_of(words.get(then + 1).ok_or_else(|| syntax(line, "missing verdict"))?)?;
                let mut conditions = Vec::new();
                for cond in words[1..then].split(|w| *w == "and") {
                    let [feature, op, args @ ..] = cond else { return Err(syntax(line, "malformed condition")) };
                    check_feature(feature)?;
                    conditions.push(Condition::Cmp { feature: feature.to_string(), guard: guard_of(op, args, line)? });
                }
                rules.push(Rule { conditions, verdict });
            }
            _ => return Err(syntax(line, "expected 'if' or 'default'")),
        }
    }
    let default = default.ok_or_else(|| syntax(lines.last().map_or(1, |l| l.0), "rule list needs a 'default' line"))?;
    Ok(GranularityClassifier::Rules { rules, default })
}

/// `class <verdict>: <bias> [+ <w>*<feature> ...]` lines and a `default`.
fn parse_linear(lines: &[(usize, &str)]) -> Result<GranularityClassifier, ClassifierError> {
    let mut classes = Vec::new();
    let mut default = None;
    for &(line, text) in lines {
        if let Some(rest) = text.strip_prefix("default") {
            default = Some(verdict_of(rest.trim())?);
            continue;
        }
        let rest = text.strip_prefix("class").ok_or_else(|| syntax(line, "expected 'class' or 'default'"))?;
        let (name, expr) = rest.split_once(':').ok_or_else(|| syntax(line, "missing ':'"))?;
        let verdict = verdict_of(name.trim())?;
        let mut bias = 0.0;
        let mut weights = Vec::new();
        for term in expr.replace('-', "+-").split('+').map(str::trim).filter(|t| !t.is_empty()) {
            let term = term.replace(' ', "");
            match term.split_once('*') {
                Some((w, feat)) => {
                    check_feature(feat)?;
                    let w: f64 = w.parse().map_err(|_| syntax(line, format!("bad weight '{w}'")))?;
                    weights.push((feat.to_string(), w));
                }
                None => bias += term.parse::<f64>().map_err(|_| syntax(line, format!("bad term '{term}'")))?,
            }
        }
        classes.push(LinearClass { verdict, bias, weights });
    }
    let default = default.ok_or_else(|| syntax(lines.last().map_or(1, |l| l.0), "linear classifier needs a 'default' line"))?;
    Ok(GranularityClassifier::Linear { classes, default })
}

pub fn parse_classifier(text: &str) -> Result<GranularityClassifier, ClassifierError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    match lines.first() {
        None => Err(syntax(1, "empty classifier")),
        Some((_, l)) if l.starts_with('(') => parse_tree(text),
        Some((_, "rules")) => parse_rules(&lines[1..]),
        Some((_, "linear")) => parse_linear(&lines[1..]),
        Some((n, _)) => Err(syntax(*n, "expected '(', 'rules' or 'linear'")),
    }
}

pub fn load_classifier(path: impl AsRef<Path>) -> Result<GranularityClassifier, ClassifierError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ClassifierError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_classifier(&text)
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(v) => write!(f, "(leaf {v})"),
            Tree::Node { feature, branches } => {
                write!(f, "(node {feature}")?;
                for (g, t) in branches {
                    write!(f, " ({g} {t})")?;
                }
                write!(f, ")")
            }
        }
    }
}

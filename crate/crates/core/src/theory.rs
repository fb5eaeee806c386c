//! Theories (definitions, theorems, buggy rules, strategies) and exercises.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::logic::{parse_closed_formula, render_formula, ArityTable, Formula, ParseError};
use crate::strategy::{parse_strategies, StrategyError, StrategyTable};

#[derive(Debug, thiserror::Error)]
pub enum TheoryError {
    #[error("line {line}: {source}")]
    Syntax {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("duplicate assertion label '{0}'")]
    DuplicateLabel(String),
    #[error("buggy assertion '{0}' needs a non-empty message")]
    MissingMessage(String),
    #[error("unknown theory '{0}'")]
    UnknownTheory(String),
    #[error("strategy error: {0}")]
    Strategy(#[from] StrategyError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AssertionKind {
    Definition,
    Theorem,
    Buggy,
}

impl AssertionKind {
    fn keyword(self) -> &'static str {
        match self {
            AssertionKind::Definition => "definition",
            AssertionKind::Theorem => "theorem",
            AssertionKind::Buggy => "buggy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub label: String,
    pub formula: Formula,
    pub kind: AssertionKind,
    pub message: Option<String>,
    pub concept: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub name: String,
    pub arities: ArityTable,
    pub assertions: Vec<Assertion>,
    /// Student-facing names for assertion labels, e.g. `Def-subset` → `Def ⊂`.
    pub display: BTreeMap<String, String>,
    pub strategy_source: String,
    pub strategies: StrategyTable,
}

impl Theory {
    pub fn empty(name: &str) -> Self {
        Theory {
            name: name.to_string(),
            arities: ArityTable::default(),
            assertions: Vec::new(),
            display: BTreeMap::new(),
            strategy_source: String::new(),
            strategies: StrategyTable::default(),
        }
    }

    pub fn assertion(&self, label: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.label == label)
    }

    pub fn display_name<'a>(&'a self, concept: &'a str) -> &'a str {
        self.display.get(concept).map(String::as_str).unwrap_or(concept)
    }

    /// Adds the buggy assertions of `bugs` to this theory.
    pub fn merge_buggy(&mut self, bugs: &Theory) -> Result<(), TheoryError> {
        for a in bugs.assertions.iter().filter(|a| a.kind == AssertionKind::Buggy) {
            if self.assertion(&a.label).is_some() {
                return Err(TheoryError::DuplicateLabel(a.label.clone()));
            }
            self.assertions.push(a.clone());
        }
        for (k, v) in &bugs.display {
            self.display.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = format!("theory {}\n", self.name);
        let defaults = ArityTable::default();
        for (name, arity) in self.arities.iter() {
            if defaults.arity(name) != Some(arity) {
                let _ = writeln!(out, "symbol {name}/{arity}");
            }
        }
        for (label, text) in &self.display {
            let _ = writeln!(out, "display {label} \"{}\"", escape(text));
        }
        for a in &self.assertions {
            match &a.message {
                Some(m) => {
                    let _ = writeln!(out, "{} {} \"{}\": {}", a.kind.keyword(), a.label, escape(m), render_formula(&a.formula));
                }
                None => {
                    let _ = writeln!(out, "{} {}: {}", a.kind.keyword(), a.label, render_formula(&a.formula));
                }
            }
        }
        if !self.strategy_source.trim().is_empty() {
            out.push_str(self.strategy_source.trim_end());
            out.push('\n');
        }
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

const TOP_KEYWORDS: &[&str] = &["theory", "symbol", "display", "definition", "theorem", "buggy", "strategy"];

/// Groups physical lines into logical items: a line starting with a top-level
/// keyword opens an item, other non-blank lines continue the previous one.
fn logical_lines(text: &str, keywords: &[&str]) -> Result<Vec<(usize, String)>, TheoryError> {
    let mut items: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let first = line.split_whitespace().next().unwrap_or("");
        let first = first.split(':').next().unwrap_or(first);
        if keywords.contains(&first) {
            items.push((i + 1, line.trim_end().to_string()));
        } else if let Some(last) = items.last_mut() {
            last.1.push('\n');
            last.1.push_str(line.trim_end());
        } else {
            return Err(TheoryError::Format { line: i + 1, message: format!("unexpected line '{}'", line.trim()) });
        }
    }
    Ok(items)
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_quoted(s: &str, line: usize) -> Result<(String, &str), TheoryError> {
    let s = s.trim_start();
    let err = || TheoryError::Format { line, message: "expected quoted string".into() };
    let mut chars = s.char_indices();
    if chars.next().map(|c| c.1) != Some('"') {
        return Err(err());
    }
    let mut out = String::new();
    let mut escaped = false;
    for (i, c) in chars {
        if escaped {
            out.push(c);
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == '"' {
            return Ok((out, &s[i + 1..]));
        } else {
            out.push(c);
        }
    }
    Err(err())
}

/// Offsets a formula parse error so it refers to the full logical line.
fn formula_at(text: &str, arities: &ArityTable, line: usize) -> Result<Formula, TheoryError> {
    parse_closed_formula(&text.replace('\n', " "), arities).map_err(|source| TheoryError::Syntax { line, source })
}

pub fn parse_theory(text: &str) -> Result<Theory, TheoryError> {
    let items = logical_lines(text, TOP_KEYWORDS)?;
    let mut theory: Option<Theory> = None;
    let mut labels = BTreeSet::new();
    let mut strategy_blocks = Vec::new();
    for (line, item) in items {
        let (kw, rest) = item.split_once(char::is_whitespace).unwrap_or((item.as_str(), ""));
        let rest = rest.trim();
        if kw == "theory" {
            if theory.is_some() {
                return Err(TheoryError::Format { line, message: "second 'theory' header".into() });
            }
            theory = Some(Theory::empty(rest));
            continue;
        }
        let Some(th) = theory.as_mut() else {
            return Err(TheoryError::Format { line, message: "missing 'theory <name>' header".into() });
        };
        match kw {
            "symbol" => {
                let (name, arity) = rest
                    .split_once('/')
                    .and_then(|(n, a)| a.trim().parse::<usize>().ok().map(|a| (n.trim(), a)))
                    .ok_or_else(|| TheoryError::Format { line, message: "expected 'symbol <name>/<arity>'".into() })?;
                th.arities.declare(name, arity).map_err(|message| TheoryError::Format { line, message })?;
            }
            "display" => {
                let (label, tail) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let (text, _) = parse_quoted(tail, line)?;
                th.display.insert(label.to_string(), text);
            }
            "definition" | "theorem" | "buggy" => {
                let kind = match kw {
                    "definition" => AssertionKind::Definition,
                    "theorem" => AssertionKind::Theorem,
                    _ => AssertionKind::Buggy,
                };
                let label_end = rest.find(|c: char| c.is_whitespace() || c == ':' || c == '"').unwrap_or(rest.len());
                let label = rest[..label_end].to_string();
                if label.is_empty() {
                    return Err(TheoryError::Format { line, message: "missing assertion label".into() });
                }
                let mut tail = rest[label_end..].trim_start();
                let mut message = None;
                if tail.starts_with('"') {
                    let (m, after) = parse_quoted(tail, line)?;
                    message = Some(m);
                    tail = after.trim_start();
                }
                let Some(body) = tail.strip_prefix(':') else {
                    return Err(TheoryError::Format { line, message: "expected ':' before formula".into() });
                };
                if kind == AssertionKind::Buggy && message.as_deref().is_none_or(|m| m.trim().is_empty()) {
                    return Err(TheoryError::MissingMessage(label));
                }
                if kind != AssertionKind::Buggy && message.is_some() {
                    return Err(TheoryError::Format { line, message: "only buggy assertions carry a message".into() });
                }
                if !labels.insert(label.clone()) {
                    return Err(TheoryError::DuplicateLabel(label));
                }
                let formula = formula_at(body, &th.arities, line)?;
                th.assertions.push(Assertion { concept: label.clone(), label, formula, kind, message });
            }
            "strategy" => strategy_blocks.push(item.clone()),
            _ => unreachable!("filtered by logical_lines"),
        }
    }
    let mut theory = theory.ok_or(TheoryError::Format { line: 1, message: "missing 'theory <name>' header".into() })?;
    theory.strategy_source = strategy_blocks.join("\n");
    theory.strategies = parse_strategies(&theory.strategy_source)?;
    Ok(theory)
}

pub fn load_theory(path: impl AsRef<Path>) -> Result<Theory, TheoryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| TheoryError::Io { path: path.display().to_string(), source })?;
    parse_theory(&text)
}

/// Tutor-facing phrasing of hints.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HintStyle {
    #[default]
    Socratic,
    Didactic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exercise {
    pub id: String,
    pub theory: String,
    pub goal: Formula,
    pub depth_limit: usize,
    pub strategy: String,
    pub classifier: String,
    pub hint_style: HintStyle,
    pub mastery_threshold: u32,
}

pub const DEFAULT_DEPTH: usize = 4;
pub const DEFAULT_MASTERY: u32 = 3;

/// Parses an exercise; `theories` resolves the theory name and its symbols.
pub fn parse_exercise(text: &str, theories: &BTreeMap<String, Theory>) -> Result<Exercise, TheoryError> {
    const KEYS: &[&str] = &["exercise", "goal", "depth", "strategy", "classifier", "hints", "mastery"];
    let items = logical_lines(text, KEYS)?;
    let mut header: Option<(String, String)> = None;
    let mut fields: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    for (line, item) in &items {
        if let Some(rest) = item.strip_prefix("exercise") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts.as_slice() {
                [id, "in", th] => header = Some((id.to_string(), th.to_string())),
                _ => {
                    return Err(TheoryError::Format { line: *line, message: "expected 'exercise <id> in <theory>'".into() })
                }
            }
            continue;
        }
        let Some((key, value)) = item.split_once(':') else {
            return Err(TheoryError::Format { line: *line, message: "expected '<field>: <value>'".into() });
        };
        let key = KEYS.iter().find(|k| **k == key.trim()).copied().ok_or_else(|| TheoryError::Format {
            line: *line,
            message: format!("unknown field '{}'", key.trim()),
        })?;
        fields.insert(key, (*line, value.trim().to_string()));
    }
    let (id, theory_name) =
        header.ok_or(TheoryError::Format { line: 1, message: "missing 'exercise <id> in <theory>' header".into() })?;
    let theory = theories.get(&theory_name).ok_or_else(|| TheoryError::UnknownTheory(theory_name.clone()))?;
    let (goal_line, goal_text) =
        fields.get("goal").cloned().ok_or(TheoryError::Format { line: 1, message: "missing 'goal:'".into() })?;
    let goal = crate::logic::parse_formula(&goal_text.replace('\n', " "), &theory.arities)
        .map_err(|source| TheoryError::Syntax { line: goal_line, source })?;
    if goal.has_metas() {
        return Err(TheoryError::Format { line: goal_line, message: "exercise goals may not contain meta-variables".into() });
    }
    let number = |key: &str, default: usize| -> Result<usize, TheoryError> {
        match fields.get(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse::<usize>()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or(TheoryError::Format { line: *line, message: format!("'{key}' must be a positive integer") }),
        }
    };
    let depth_limit = number("depth", DEFAULT_DEPTH)?;
    let mastery_threshold = number("mastery", DEFAULT_MASTERY as usize)? as u32;
    let strategy = fields.get("strategy").map(|v| v.1.clone()).unwrap_or_else(|| "close-by-definition".into());
    if theory.strategies.get(&strategy).is_none() {
        let line = fields.get("strategy").map_or(1, |v| v.0);
        return Err(TheoryError::Format { line, message: format!("unknown strategy '{strategy}'") });
    }
    let classifier = fields.get("classifier").map(|v| v.1.clone()).unwrap_or_else(|| "standard".into());
    let hint_style = match fields.get("hints").map(|v| (v.0, v.1.as_str())) {
        None | Some((_, "socratic")) => HintStyle::Socratic,
        Some((_, "didactic")) => HintStyle::Didactic,
        Some((line, other)) => {
            return Err(TheoryError::Format { line, message: format!("unknown hint style '{other}'") })
        }
    };
    Ok(Exercise { id, theory: theory_name, goal, depth_limit, strategy, classifier, hint_style, mastery_threshold })
}

pub fn load_exercise(path: impl AsRef<Path>, theories: &BTreeMap<String, Theory>) -> Result<Exercise, TheoryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| TheoryError::Io { path: path.display().to_string(), source })?;
    parse_exercise(&text, theories)
}

//! The declarative proof-script language and its tutorial relaxations.

use std::fmt;

use crate::logic::{render_formula, render_term, tokenize, ArityTable, Cursor, Formula, ParseError, Pred, Term, Tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    Implies,
    Iff,
}

/// The `.<binop> <form>` continuation of a calculational chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Continuation {
    Term(Pred, Term),
    Formula(Connective, Formula),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SForm {
    Formula(Formula),
    Continuation(Continuation),
}

impl SForm {
    /// The stated formula; continuations are chained onto `previous`.
    pub fn resolve(&self, previous: Option<&Formula>) -> Option<Formula> {
        match self {
            SForm::Formula(f) => Some(f.clone()),
            SForm::Continuation(Continuation::Term(p, rhs)) => match previous? {
                Formula::Atom(_, _, prev_rhs) => Some(Formula::Atom(*p, prev_rhs.clone(), rhs.clone())),
                _ => None,
            },
            SForm::Continuation(Continuation::Formula(c, rhs)) => {
                let lhs = match previous? {
                    Formula::Implies(_, b) | Formula::Iff(_, b) => (**b).clone(),
                    other => other.clone(),
                };
                Some(match c {
                    Connective::Implies => Formula::implies(lhs, rhs.clone()),
                    Connective::Iff => Formula::iff(lhs, rhs.clone()),
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub formula: Formula,
    pub using: Vec<Formula>,
    pub by: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetValue {
    Term(Term),
    Formula(Formula),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub hyp: Formula,
    pub steps: Vec<ProofStep>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofStep {
    Assume { hyps: Vec<Formula>, from: Vec<String>, thus: Option<Formula> },
    Fact { form: SForm, by: Option<String>, from: Vec<String> },
    Subgoal(Goal),
    Subgoals { goals: Vec<Goal>, by: Option<String> },
    Cases { cases: Vec<Case>, by: Option<String>, from: Vec<String> },
    Set(Vec<(String, SetValue)>),
    Trivial { by: Option<String>, from: Vec<String> },
    Qed,
}

impl ProofStep {
    pub fn keyword(&self) -> &'static str {
        match self {
            ProofStep::Assume { .. } => "assume",
            ProofStep::Fact { .. } => "fact",
            ProofStep::Subgoal(_) => "subgoal",
            ProofStep::Subgoals { .. } => "subgoals",
            ProofStep::Cases { .. } => "cases",
            ProofStep::Set(_) => "set",
            ProofStep::Trivial { .. } => "trivial",
            ProofStep::Qed => "qed",
        }
    }

    /// The assertion named in a `by` clause, if any.
    pub fn justification(&self) -> Option<&str> {
        match self {
            ProofStep::Fact { by, .. } | ProofStep::Subgoals { by, .. } | ProofStep::Cases { by, .. } => by.as_deref(),
            ProofStep::Trivial { by, .. } => by.as_deref(),
            ProofStep::Subgoal(g) => g.by.as_deref(),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProofScript {
    pub steps: Vec<ProofStep>,
    pub spans: Vec<Span>,
    pub qed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub message: String,
}

impl ScriptError {
    fn from_parse(e: ParseError, source: &str) -> Self {
        let (line, column) = e.line_col(source);
        ScriptError { line, column, offset: e.offset, message: e.message }
    }
}

const STEP_KEYWORDS: &[&str] =
    &["assume", "let", "hence", "subgoal", "subgoals", "cases", "set", "trivial", "qed", "proof"];

struct StepParser<'a> {
    cur: Cursor<'a>,
}

impl<'a> StepParser<'a> {
    fn at_step_end(&self) -> bool {
        matches!(self.cur.peek(), Tok::Eof | Tok::Newline | Tok::Op(";") | Tok::Op("}")) || self.cur.is_word("qed")
    }

    fn label_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.cur.ident()?];
        while self.cur.eat_op(",") {
            out.push(self.cur.ident()?);
        }
        Ok(out)
    }

    /// `[by NAME] [from l1, l2]` in either order.
    fn justification(&mut self) -> Result<(Option<String>, Vec<String>), ParseError> {
        let mut by = None;
        let mut from = Vec::new();
        loop {
            if by.is_none() && self.cur.eat_word("by") {
                by = Some(self.cur.ident()?);
            } else if from.is_empty() && self.cur.eat_word("from") {
                from = self.label_list()?;
            } else {
                return Ok((by, from));
            }
        }
    }

    fn goal(&mut self) -> Result<Goal, ParseError> {
        let formula = self.cur.formula()?;
        let mut using = Vec::new();
        if self.cur.eat_word("using") {
            using.push(self.cur.formula()?);
            while self.cur.eat_op(",") || self.cur.eat_word("and") {
                using.push(self.cur.formula()?);
            }
        }
        let by = if self.cur.eat_word("by") { Some(self.cur.ident()?) } else { None };
        Ok(Goal { formula, using, by })
    }

    fn set_value(&mut self) -> Result<SetValue, ParseError> {
        let start = self.cur.pos;
        match self.cur.formula() {
            Ok(f) => Ok(SetValue::Formula(f)),
            Err(fe) => {
                let formula_pos = self.cur.pos;
                self.cur.pos = start;
                match self.cur.term() {
                    Ok(t) => Ok(SetValue::Term(t)),
                    Err(te) if fe.offset > te.offset && formula_pos > start => Err(fe),
                    Err(te) => Err(te),
                }
            }
        }
    }

    fn continuation(&mut self) -> Result<Continuation, ParseError> {
        let pred = match self.cur.peek() {
            Tok::Op("=") => Some(Pred::Eq),
            Tok::Word(w) if w == "in" => Some(Pred::In),
            Tok::Word(w) if w == "subset" => Some(Pred::Subset),
            Tok::Word(w) if w == "supset" => Some(Pred::Supset),
            _ => None,
        };
        if let Some(p) = pred {
            self.cur.bump();
            return Ok(Continuation::Term(p, self.cur.term()?));
        }
        if self.cur.eat_op("->") {
            return Ok(Continuation::Formula(Connective::Implies, self.cur.formula()?));
        }
        if self.cur.eat_op("<->") {
            return Ok(Continuation::Formula(Connective::Iff, self.cur.formula()?));
        }
        Err(self.cur.error("expected binary operator after '.'"))
    }

    fn fact(&mut self) -> Result<ProofStep, ParseError> {
        let form = if self.cur.eat_op(".") {
            SForm::Continuation(self.continuation()?)
        } else {
            let first = self.cur.peek().clone();
            let second = self.cur.peek_at(1).clone();
            let start = self.cur.offset();
            match self.cur.formula() {
                Ok(f) => SForm::Formula(f),
                Err(e) => {
                    if let (Tok::Word(w), Tok::Word(n)) = (&first, &second) {
                        if !crate::logic::is_reserved(w) && !crate::logic::is_reserved(n) {
                            return Err(ParseError::new(start, format!("unknown keyword '{w}'")));
                        }
                    }
                    return Err(e);
                }
            }
        };
        let (by, from) = self.justification()?;
        Ok(ProofStep::Fact { form, by, from })
    }

    fn step(&mut self) -> Result<ProofStep, ParseError> {
        if self.cur.eat_word("assume") || self.cur.eat_word("let") {
            let mut hyps = vec![self.cur.formula()?];
            while self.cur.eat_word("and") {
                hyps.push(self.cur.formula()?);
            }
            let from = if self.cur.eat_word("from") { self.label_list()? } else { Vec::new() };
            let thus = if self.cur.eat_word("thus") { Some(self.cur.formula()?) } else { None };
            return Ok(ProofStep::Assume { hyps, from, thus });
        }
        if self.cur.eat_word("hence") {
            return self.fact();
        }
        if self.cur.eat_word("subgoals") {
            let by = if self.cur.eat_word("by") { Some(self.cur.ident()?) } else { None };
            let mut goals = Vec::new();
            while self.cur.eat_word("subgoal") {
                goals.push(self.goal()?);
            }
            if goals.is_empty() {
                return Err(self.cur.error("expected 'subgoal'"));
            }
            return Ok(ProofStep::Subgoals { goals, by });
        }
        if self.cur.eat_word("subgoal") {
            return Ok(ProofStep::Subgoal(self.goal()?));
        }
        if self.cur.eat_word("cases") {
            let (by, from) = self.justification()?;
            let mut cases = Vec::new();
            while self.cur.eat_op("{") {
                let hyp = self.cur.formula()?;
                self.cur.expect_op(":")?;
                let steps = self.steps(true)?.into_iter().map(|(s, _)| s).collect();
                self.cur.expect_op("}")?;
                cases.push(Case { hyp, steps });
            }
            if cases.is_empty() {
                return Err(self.cur.error("expected '{' opening a case"));
            }
            return Ok(ProofStep::Cases { cases, by, from });
        }
        if self.cur.eat_word("set") {
            let mut binds = Vec::new();
            loop {
                let name = self.cur.ident()?;
                self.cur.expect_op("=")?;
                binds.push((name, self.set_value()?));
                if !self.cur.eat_op(",") {
                    break;
                }
            }
            return Ok(ProofStep::Set(binds));
        }
        if self.cur.eat_word("trivial") {
            let (by, from) = self.justification()?;
            return Ok(ProofStep::Trivial { by, from });
        }
        if self.cur.eat_word("qed") {
            return Ok(ProofStep::Qed);
        }
        if let Tok::Word(w) = self.cur.peek() {
            if ["thus", "by", "from", "using", "and", "proof"].contains(&w.as_str()) {
                return Err(self.cur.error("unexpected keyword at start of step"));
            }
        }
        self.fact()
    }
}

fn skip_separators(cur: &mut Cursor<'_>) {
    while matches!(cur.peek(), Tok::Newline | Tok::Op(";")) {
        cur.bump();
    }
}

impl StepParser<'_> {
    /// Parses steps until end of input (or `}` when `nested`).
    fn steps(&mut self, nested: bool) -> Result<Vec<(ProofStep, Span)>, ParseError> {
        let mut out = Vec::new();
        loop {
            skip_separators(&mut self.cur);
            match self.cur.peek() {
                Tok::Eof => return Ok(out),
                Tok::Op("}") if nested => return Ok(out),
                _ => {}
            }
            let start = self.cur.offset();
            let step = self.step()?;
            if !self.at_step_end() {
                return Err(self.cur.error("expected end of step"));
            }
            let end = self.cur.tokens[..self.cur.pos]
                .last()
                .map_or(start, |t| t.offset + token_len(&t.tok))
                .max(start);
            out.push((step, Span { start, end }));
        }
    }
}

fn token_len(t: &Tok) -> usize {
    match t {
        Tok::Word(w) => w.len(),
        Tok::Meta(m) => m.len() + 1,
        Tok::Str(s) => s.len() + 2,
        Tok::Op(o) => o.len(),
        Tok::Newline | Tok::Eof => 0,
    }
}

pub fn parse_step(text: &str) -> Result<ProofStep, ParseError> {
    parse_step_with(text, &ArityTable::default())
}

pub fn parse_step_with(text: &str, arities: &ArityTable) -> Result<ProofStep, ParseError> {
    let tokens: Vec<Token> = tokenize(text)?;
    let mut p = StepParser { cur: Cursor::new(&tokens, arities) };
    skip_separators(&mut p.cur);
    if matches!(p.cur.peek(), Tok::Eof) {
        return Err(p.cur.error("expected a proof step"));
    }
    let step = p.step()?;
    skip_separators(&mut p.cur);
    if !matches!(p.cur.peek(), Tok::Eof) {
        return Err(p.cur.error("unexpected trailing input"));
    }
    Ok(step)
}

pub fn parse_script(text: &str) -> Result<ProofScript, ScriptError> {
    parse_script_with(text, &ArityTable::default())
}

pub fn parse_script_with(text: &str, arities: &ArityTable) -> Result<ProofScript, ScriptError> {
    let err = |e: ParseError| ScriptError::from_parse(e, text);
    let tokens = tokenize(text).map_err(err)?;
    let mut p = StepParser { cur: Cursor::new(&tokens, arities) };
    skip_separators(&mut p.cur);
    p.cur.eat_word("proof");
    let steps = p.steps(false).map_err(err)?;
    let mut script = ProofScript::default();
    let n = steps.len();
    for (i, (step, span)) in steps.into_iter().enumerate() {
        if step == ProofStep::Qed {
            if i + 1 != n {
                return Err(ScriptError::from_parse(ParseError::new(span.start, "'qed' must be the last step"), text));
            }
            script.qed = true;
        } else {
            script.steps.push(step);
            script.spans.push(span);
        }
    }
    Ok(script)
}

fn write_labels(out: &mut String, by: &Option<String>, from: &[String]) {
    if let Some(b) = by {
        out.push_str(" by ");
        out.push_str(b);
    }
    if !from.is_empty() {
        out.push_str(" from ");
        out.push_str(&from.join(", "));
    }
}

fn write_goal(out: &mut String, g: &Goal) {
    out.push_str("subgoal ");
    out.push_str(&render_formula(&g.formula));
    if !g.using.is_empty() {
        out.push_str(" using ");
        out.push_str(&g.using.iter().map(render_formula).collect::<Vec<_>>().join(", "));
    }
    if let Some(b) = &g.by {
        out.push_str(" by ");
        out.push_str(b);
    }
}

pub fn render_step(step: &ProofStep) -> String {
    let mut out = String::new();
    match step {
        ProofStep::Assume { hyps, from, thus } => {
            out.push_str("assume ");
            out.push_str(&hyps.iter().map(render_formula).collect::<Vec<_>>().join(" and "));
            write_labels(&mut out, &None, from);
            if let Some(t) = thus {
                out.push_str(" thus ");
                out.push_str(&render_formula(t));
            }
        }
        ProofStep::Fact { form, by, from } => {
            match form {
                SForm::Formula(f) => out.push_str(&render_formula(f)),
                SForm::Continuation(Continuation::Term(p, t)) => {
                    out.push_str(&format!(". {} {}", p.ascii(), render_term(t)));
                }
                SForm::Continuation(Continuation::Formula(c, f)) => {
                    let op = if *c == Connective::Implies { "->" } else { "<->" };
                    out.push_str(&format!(". {op} {}", render_formula(f)));
                }
            }
            write_labels(&mut out, by, from);
        }
        ProofStep::Subgoal(g) => write_goal(&mut out, g),
        ProofStep::Subgoals { goals, by } => {
            out.push_str("subgoals");
            if let Some(b) = by {
                out.push_str(" by ");
                out.push_str(b);
            }
            for g in goals {
                out.push(' ');
                write_goal(&mut out, g);
            }
        }
        ProofStep::Cases { cases, by, from } => {
            out.push_str("cases");
            write_labels(&mut out, by, from);
            for c in cases {
                out.push_str(" { ");
                out.push_str(&render_formula(&c.hyp));
                out.push(':');
                let inner: Vec<String> = c.steps.iter().map(render_step).collect();
                if !inner.is_empty() {
                    out.push(' ');
                    out.push_str(&inner.join("; "));
                }
                out.push_str(" }");
            }
        }
        ProofStep::Set(binds) => {
            out.push_str("set ");
            let parts: Vec<String> = binds
                .iter()
                .map(|(n, v)| match v {
                    SetValue::Term(t) => format!("{n} = {}", render_term(t)),
                    SetValue::Formula(f) => format!("{n} = {}", render_formula(f)),
                })
                .collect();
            out.push_str(&parts.join(", "));
        }
        ProofStep::Trivial { by, from } => {
            out.push_str("trivial");
            write_labels(&mut out, by, from);
        }
        ProofStep::Qed => out.push_str("qed"),
    }
    out
}

pub fn render_script(script: &ProofScript) -> String {
    let mut lines: Vec<String> = script.steps.iter().map(render_step).collect();
    if script.qed {
        lines.push("qed".into());
    }
    format!("proof\n{}\n", lines.join("\n"))
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_step(self))
    }
}

/// Words that open a step, for REPL completion and diagnostics.
pub fn step_keywords() -> &'static [&'static str] {
    STEP_KEYWORDS
}

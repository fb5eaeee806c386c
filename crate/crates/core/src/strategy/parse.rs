use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{tokenize, ParseError, Tok, Token};

use super::{SelectDirection, StrategyError, StrategyExpr, StrategyTable, BUILTINS, SOURCE_SETS};

const KEYWORDS: &[&str] =
    &["strategy", "repeat", "use", "select", "from", "as", "backward", "forward", "try", "then", "first"];

struct Reader<'a> {
    tokens: Vec<&'a Token>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn bump(&mut self) {
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.is_word(w);
        if hit {
            self.bump();
        }
        hit
    }

    fn eat_op(&mut self, op: &str) -> bool {
        let hit = matches!(self.peek(), Tok::Op(o) if *o == op);
        if hit {
            self.bump();
        }
        hit
    }

    fn error(&self, msg: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Eof => "end of input".to_string(),
            Tok::Word(w) => format!("'{w}'"),
            Tok::Op(o) => format!("'{o}'"),
            Tok::Meta(m) => format!("'?{m}'"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Newline => "end of line".to_string(),
        };
        ParseError::new(self.offset(), format!("{msg}, found {found}"))
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{w}'")))
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.error("expected strategy name")),
        }
    }

    fn expr(&mut self) -> Result<StrategyExpr, ParseError> {
        let first = self.unary()?;
        if self.eat_word("then") {
            let rest = self.expr()?;
            return Ok(StrategyExpr::Seq(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    fn unary(&mut self) -> Result<StrategyExpr, ParseError> {
        if self.eat_word("try") {
            return Ok(StrategyExpr::Try(Box::new(self.unary()?)));
        }
        if self.eat_word("repeat") {
            return Ok(StrategyExpr::Repeat(Box::new(self.unary()?)));
        }
        if self.eat_word("first") {
            let mut alts = vec![self.unary()?];
            while self.eat_op(",") {
                alts.push(self.unary()?);
            }
            return Ok(StrategyExpr::First(alts));
        }
        if self.eat_word("use") {
            self.expect_word("select")?;
            let selector = if self.eat_op("*") { "*".to_string() } else { self.name()? };
            self.expect_word("from")?;
            let at = self.offset();
            let source = self.name()?;
            if !SOURCE_SETS.contains(&source.as_str()) {
                return Err(ParseError::new(
                    at,
                    format!("unknown assertion set '{source}' (expected one of {})", SOURCE_SETS.join(", ")),
                ));
            }
            self.expect_word("as")?;
            let direction = if self.eat_word("backward") {
                SelectDirection::Backward
            } else if self.eat_word("forward") {
                SelectDirection::Forward
            } else {
                return Err(self.error("expected 'backward' or 'forward'"));
            };
            return Ok(StrategyExpr::UseSelect { selector, source, direction });
        }
        if self.eat_op("(") {
            let inner = self.expr()?;
            if !self.eat_op(")") {
                return Err(self.error("expected ')'"));
            }
            return Ok(inner);
        }
        let name = self.name()?;
        if BUILTINS.contains(&name.as_str()) {
            Ok(StrategyExpr::Builtin(name))
        } else {
            Ok(StrategyExpr::Call(name))
        }
    }
}

/// Parses a sequence of `strategy <name> <expr>` blocks.
pub fn parse_strategies(text: &str) -> Result<StrategyTable, StrategyError> {
    let all = tokenize(text)?;
    let tokens: Vec<&Token> = all.iter().filter(|t| t.tok != Tok::Newline).collect();
    let mut r = Reader { tokens, pos: 0 };
    let mut entries: Vec<(String, StrategyExpr)> = Vec::new();
    while *r.peek() != Tok::Eof {
        r.expect_word("strategy")?;
        let at = r.offset();
        let name = r.name()?;
        if BUILTINS.contains(&name.as_str()) || entries.iter().any(|(n, _)| *n == name) {
            return Err(StrategyError::Duplicate { name, offset: at });
        }
        let body = r.expr()?;
        entries.push((name, body));
    }
    let table = StrategyTable { entries };
    table.resolve()?;
    Ok(table)
}

impl StrategyTable {
    /// Checks that all calls resolve and that no strategy reaches itself
    /// without passing through a `repeat`.
    pub(super) fn resolve(&self) -> Result<(), StrategyError> {
        let mut edges: BTreeMap<&str, Vec<(&str, bool)>> = BTreeMap::new();
        for (name, body) in &self.entries {
            let mut calls = Vec::new();
            body.calls(false, &mut calls);
            for (callee, _) in &calls {
                if self.get(callee).is_none() {
                    return Err(StrategyError::Unknown { name: callee.to_string(), within: name.clone() });
                }
            }
            edges.insert(name, calls);
        }
        for (start, _) in &self.entries {
            let mut seen = BTreeSet::new();
            let mut stack = vec![start.as_str()];
            while let Some(cur) = stack.pop() {
                for (next, via_repeat) in edges.get(cur).into_iter().flatten() {
                    if *via_repeat {
                        continue;
                    }
                    if next == start {
                        return Err(StrategyError::Cycle(start.clone()));
                    }
                    if seen.insert(*next) {
                        stack.push(next);
                    }
                }
            }
        }
        Ok(())
    }
}

impl StrategyExpr {
    fn calls<'a>(&'a self, under_repeat: bool, out: &mut Vec<(&'a str, bool)>) {
        match self {
            StrategyExpr::Call(n) => out.push((n, under_repeat)),
            StrategyExpr::Seq(a, b) => {
                a.calls(under_repeat, out);
                b.calls(under_repeat, out);
            }
            StrategyExpr::Try(e) => e.calls(under_repeat, out),
            StrategyExpr::Repeat(e) => e.calls(true, out),
            StrategyExpr::First(alts) => alts.iter().for_each(|a| a.calls(under_repeat, out)),
            StrategyExpr::UseSelect { .. } | StrategyExpr::Builtin(_) => {}
        }
    }
}

use std::collections::BTreeMap;

use super::lexer::{tokenize, Tok, Token};
use super::syntax::{Formula, Pred, Term};
use super::ParseError;

/// Function symbols and their arities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArityTable {
    symbols: BTreeMap<String, usize>,
}

impl Default for ArityTable {
    fn default() -> Self {
        let mut symbols = BTreeMap::new();
        symbols.insert("comp".to_string(), 2);
        symbols.insert("inv".to_string(), 1);
        symbols.insert("union".to_string(), 2);
        symbols.insert("inter".to_string(), 2);
        ArityTable { symbols }
    }
}

impl ArityTable {
    pub fn empty() -> Self {
        ArityTable { symbols: BTreeMap::new() }
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), String> {
        match self.symbols.get(name) {
            Some(&a) if a != arity => Err(format!("symbol {name} already declared with arity {a}")),
            _ => {
                self.symbols.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Words that can never be used as term identifiers.
pub const RESERVED: &[&str] = &[
    "forall", "exists", "not", "in", "subset", "supset", "proof", "qed", "assume", "let", "thus",
    "hence", "subgoal", "subgoals", "cases", "set", "trivial", "by", "from", "using", "and",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Recursive-descent reader over a token slice.
///
/// The script and theory readers embed formulas inside larger token streams,
/// so the cursor is exposed to the rest of the crate.
pub(crate) struct Cursor<'a> {
    pub tokens: &'a [Token],
    pub pos: usize,
    pub arities: &'a ArityTable,
    pub closed: bool,
    bound: Vec<String>,
}

impl<'a> Cursor<'a> {
    pub fn new(tokens: &'a [Token], arities: &'a ArityTable) -> Self {
        Cursor { tokens, pos: 0, arities, closed: false, bound: Vec::new() }
    }

    pub fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    pub fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    pub fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    pub fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    pub fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_op(&mut self, op: &str) -> Result<(), ParseError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{op}'")))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Word(w) if !is_reserved(&w) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let found = match self.peek() {
            Tok::Eof => "end of input".to_string(),
            Tok::Newline => "end of line".to_string(),
            Tok::Word(w) => format!("'{w}'"),
            Tok::Meta(m) => format!("'?{m}'"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Op(o) => format!("'{o}'"),
        };
        ParseError::new(self.offset(), format!("{}, found {found}", msg.into()))
    }

    pub fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while self.eat_op("<->") {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat_op("->") {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat_op("\\/") {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat_op("/\\") {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat_word("not") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_word("forall") || self.is_word("exists") {
            let universal = self.is_word("forall");
            self.bump();
            let mut vars = vec![self.ident()?];
            while !self.is_op(".") {
                vars.push(self.ident()?);
            }
            self.expect_op(".")?;
            let depth = self.bound.len();
            self.bound.extend(vars.iter().cloned());
            let body = self.iff();
            self.bound.truncate(depth);
            let mut f = body?;
            for v in vars.iter().rev() {
                f = if universal { Formula::forall(v, f) } else { Formula::exists(v, f) };
            }
            return Ok(f);
        }
        if self.is_op("(") {
            let start = self.pos;
            let atom_err = match self.atom() {
                Ok(f) => return Ok(f),
                Err(e) => e,
            };
            self.pos = start;
            self.bump();
            let inner = self.iff().and_then(|f| self.expect_op(")").map(|_| f));
            return match inner {
                Ok(f) => Ok(f),
                Err(e) if e.offset >= atom_err.offset => Err(e),
                Err(_) => Err(atom_err),
            };
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.term()?;
        let pred = match self.peek() {
            Tok::Op("=") => Pred::Eq,
            Tok::Word(w) if w == "in" => Pred::In,
            Tok::Word(w) if w == "subset" => Pred::Subset,
            Tok::Word(w) if w == "supset" => Pred::Supset,
            _ => return Err(self.error("expected predicate (in, =, subset, supset)")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Atom(pred, lhs, rhs))
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        // infix aliases: ∪ binds loosest, then ∩, then ∘
        self.term_union()
    }

    fn term_union(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.term_inter()?;
        while self.eat_op("∪") {
            lhs = Term::union(lhs, self.term_inter()?);
        }
        Ok(lhs)
    }

    fn term_inter(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.term_comp()?;
        while self.eat_op("∩") {
            lhs = Term::inter(lhs, self.term_comp()?);
        }
        Ok(lhs)
    }

    fn term_comp(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.term_postfix()?;
        while self.eat_op("∘") {
            lhs = Term::comp(lhs, self.term_postfix()?);
        }
        Ok(lhs)
    }

    fn term_postfix(&mut self) -> Result<Term, ParseError> {
        let mut t = self.term_primary()?;
        while self.eat_op("⁻¹") {
            t = Term::inv(t);
        }
        Ok(t)
    }

    fn term_primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Meta(m) => {
                self.bump();
                Ok(Term::Meta(m))
            }
            Tok::Op("(") => {
                self.bump();
                let first = self.term()?;
                if self.eat_op(",") {
                    let second = self.term()?;
                    self.expect_op(")")?;
                    Ok(Term::pair(first, second))
                } else if self.eat_op(")") {
                    Ok(first)
                } else {
                    Err(self.error("expected ',' or ')'"))
                }
            }
            Tok::Word(w) if !is_reserved(&w) => {
                let at = self.offset();
                self.bump();
                if self.is_op("(") {
                    let Some(arity) = self.arities.arity(&w) else {
                        return Err(ParseError::new(at, format!("unknown function symbol '{w}'")));
                    };
                    self.bump();
                    let mut args = vec![self.term()?];
                    while self.eat_op(",") {
                        args.push(self.term()?);
                    }
                    self.expect_op(")")?;
                    if args.len() != arity {
                        return Err(ParseError::new(
                            at,
                            format!("arity mismatch: '{w}' takes {arity} argument(s), got {}", args.len()),
                        ));
                    }
                    return Ok(Term::App(w, args));
                }
                if self.bound.contains(&w) {
                    return Ok(Term::Var(w));
                }
                match self.arities.arity(&w) {
                    Some(0) => Ok(Term::Const(w)),
                    Some(n) => Err(ParseError::new(
                        at,
                        format!("arity mismatch: '{w}' takes {n} argument(s), got 0"),
                    )),
                    None if self.closed => {
                        Err(ParseError::new(at, format!("unbound variable '{w}' in closed formula")))
                    }
                    None => Ok(Term::Const(w)),
                }
            }
            _ => Err(self.error("expected term")),
        }
    }
}

fn finish(cur: &mut Cursor<'_>) -> Result<(), ParseError> {
    while matches!(cur.peek(), Tok::Newline) {
        cur.bump();
    }
    if matches!(cur.peek(), Tok::Eof) {
        Ok(())
    } else {
        Err(cur.error("unexpected trailing input"))
    }
}

/// Parses a formula in the ASCII (or Unicode alias) concrete syntax.
/// Free identifiers become constants.
pub fn parse_formula(text: &str, arities: &ArityTable) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut cur = Cursor::new(&tokens, arities);
    let f = cur.formula()?;
    finish(&mut cur)?;
    Ok(f)
}

/// Parses a closed formula: every identifier must be bound or a declared constant.
pub fn parse_closed_formula(text: &str, arities: &ArityTable) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut cur = Cursor::new(&tokens, arities);
    cur.closed = true;
    let f = cur.formula()?;
    finish(&mut cur)?;
    Ok(f)
}

pub fn parse_term(text: &str, arities: &ArityTable) -> Result<Term, ParseError> {
    let tokens = tokenize(text)?;
    let mut cur = Cursor::new(&tokens, arities);
    let t = cur.term()?;
    finish(&mut cur)?;
    Ok(t)
}

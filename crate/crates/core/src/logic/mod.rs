//! First-order syntax with meta-variables: terms, formulas, sequents,
//! substitutions, unification and the ASCII concrete syntax.

mod lexer;
mod parse;
mod render;
mod sequent;
mod subst;
mod syntax;
mod unify;



pub use parse::{is_reserved, parse_closed_formula, parse_formula, parse_term, ArityTable};
pub use render::{render_formula, render_math, render_term, render_term_math};
pub use sequent::{Hyp, Sequent};
pub use subst::{instantiate, replace_consts, replace_consts_term, substitute, Subst};
pub use syntax::{Formula, Pred, Term};
pub use unify::{alpha_eq, alpha_key, match_formula, unify, unify_term, unify_with};

pub(crate) use lexer::{tokenize, Tok, Token};
pub(crate) use parse::Cursor;

/// A syntax error with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }

    /// Line and column (both 1-based) of the error within `source`.
    pub fn line_col(&self, source: &str) -> (usize, usize) {
        let upto = &source[..self.offset.min(source.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

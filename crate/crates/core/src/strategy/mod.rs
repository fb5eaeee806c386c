//! Strategy DSL, its interpreter, and hierarchical proof plans.

mod parse;
mod plan;
mod run;

use std::fmt;

use crate::logic::ParseError;

pub use parse::parse_strategies;
pub use plan::{Edge, EdgeLabel, FlatEdge, FlatGraph, HierarchicalProofPlan, Level, PlanNode};
pub use run::{run_strategy, run_strategy_from, RunOutcome, DEFAULT_BUDGET};

pub const BUILTINS: &[&str] = &["deepaxiom", "or-l"];
pub const SOURCE_SETS: &[&str] = &["definitions", "theorems", "assertions"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SelectDirection {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyExpr {
    Call(String),
    Seq(Box<StrategyExpr>, Box<StrategyExpr>),
    Try(Box<StrategyExpr>),
    Repeat(Box<StrategyExpr>),
    First(Vec<StrategyExpr>),
    UseSelect { selector: String, source: String, direction: SelectDirection },
    Builtin(String),
}

impl fmt::Display for StrategyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyExpr::Call(n) | StrategyExpr::Builtin(n) => f.write_str(n),
            StrategyExpr::Seq(a, b) => {
                if matches!(**a, StrategyExpr::Seq(..)) {
                    write!(f, "({a}) then {b}")
                } else {
                    write!(f, "{a} then {b}")
                }
            }
            StrategyExpr::Try(e) => write!(f, "try {}", Operand(e)),
            StrategyExpr::Repeat(e) => write!(f, "repeat {}", Operand(e)),
            StrategyExpr::First(alts) => {
                f.write_str("first ")?;
                for (i, a) in alts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", Operand(a))?;
                }
                Ok(())
            }
            StrategyExpr::UseSelect { selector, source, direction } => {
                let dir = match direction {
                    SelectDirection::Forward => "forward",
                    SelectDirection::Backward => "backward",
                };
                write!(f, "use select {selector} from {source} as {dir}")
            }
        }
    }
}

struct Operand<'a>(&'a StrategyExpr);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            StrategyExpr::Seq(..) | StrategyExpr::First(_) => write!(f, "({})", self.0),
            e => write!(f, "{e}"),
        }
    }
}

/// Named strategies in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyTable {
    entries: Vec<(String, StrategyExpr)>,
}

impl StrategyTable {
    pub fn get(&self, name: &str) -> Option<&StrategyExpr> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &StrategyExpr)> {
        self.entries.iter().map(|(n, e)| (n.as_str(), e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("strategy '{within}' refers to unknown strategy '{name}'")]
    Unknown { name: String, within: String },
    #[error("strategy '{name}' defined twice (offset {offset})")]
    Duplicate { name: String, offset: usize },
    #[error("strategy '{0}' calls itself without an enclosing repeat")]
    Cycle(String),
}

//! Proof tutoring engine: reconstruction of underspecified proof steps,
//! granularity and relevance judgement, and strategy-based hinting.

pub mod eval;
pub mod granularity;
pub mod hint;
pub mod logic;
pub mod rules;
pub mod reconstruction;
pub mod script;
pub mod session;
pub mod strategy;
pub mod theory;

//! Corpus evaluation: replays labelled dialog steps and tallies verdicts.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::reconstruction::{initial_states, reconstruct_step, MentalProofState, SearchLimits, Verdict};
use crate::script::parse_step;
use crate::session::Library;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gold {
    Correct,
    Incorrect,
}

impl Gold {
    pub fn as_str(self) -> &'static str {
        match self {
            Gold::Correct => "correct",
            Gold::Incorrect => "incorrect",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusStep {
    pub line: usize,
    pub exercise: String,
    pub dialog: String,
    pub gold: Gold,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Malformed {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub steps: Vec<CorpusStep>,
    pub malformed: Vec<Malformed>,
}

pub fn parse_corpus(text: &str) -> Corpus {
    let mut corpus = Corpus::default();
    let mut exercise: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut bad = |m: &str| corpus.malformed.push(Malformed { line, message: m.to_string() });
        if let Some(rest) = l.strip_prefix("==") {
            match rest.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["exercise", id] => exercise = Some(id.to_string()),
                _ => bad("expected '== exercise <id>'"),
            }
            continue;
        }
        let Some(rest) = l.strip_prefix(':') else {
            bad("expected ':<dialog-id> <gold> <step>'");
            continue;
        };
        let mut parts = rest.splitn(3, char::is_whitespace);
        let (Some(dialog), Some(gold), Some(text)) = (parts.next(), parts.next(), parts.next()) else {
            bad("expected ':<dialog-id> <gold> <step>'");
            continue;
        };
        let gold = match gold {
            "correct" => Gold::Correct,
            "incorrect" => Gold::Incorrect,
            other => {
                bad(&format!("unknown label '{other}'"));
                continue;
            }
        };
        let Some(ex) = exercise.clone() else {
            bad("step before any '== exercise' header");
            continue;
        };
        corpus.steps.push(CorpusStep { line, exercise: ex, dialog: dialog.to_string(), gold, text: text.trim().to_string() });
    }
    corpus
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepVerdict {
    pub line: usize,
    pub exercise: String,
    pub dialog: String,
    pub gold: Gold,
    pub verified: bool,
    pub verdict: String,
    pub text: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub correct_verified: usize,
    pub correct_rejected: usize,
    pub incorrect_verified: usize,
    pub incorrect_rejected: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.correct_verified + self.correct_rejected + self.incorrect_verified + self.incorrect_rejected
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvalReport {
    /// Depth override; `None` means each exercise's own limit.
    pub depth: Option<usize>,
    pub counts: Confusion,
    pub steps: Vec<StepVerdict>,
    pub malformed: Vec<Malformed>,
}

/// Replays each dialog in order; verified steps advance the dialog's state.
/// `depth` overrides the exercises' own depth limits.
pub fn evaluate_corpus(corpus: &Corpus, library: &Library, depth: Option<usize>) -> EvalReport {
    let mut malformed = corpus.malformed.clone();
    let mut live: BTreeMap<(String, String), Vec<MentalProofState>> = BTreeMap::new();
    let mut counts = Confusion::default();
    let mut steps = Vec::new();
    for s in &corpus.steps {
        let Some(ex) = library.exercise(&s.exercise) else {
            malformed.push(Malformed { line: s.line, message: format!("unknown exercise '{}'", s.exercise) });
            continue;
        };
        let step = match parse_step(&s.text) {
            Ok(step) => step,
            Err(e) => {
                malformed.push(Malformed { line: s.line, message: e.to_string() });
                continue;
            }
        };
        let theory = library.theory_for(ex);
        let limits = SearchLimits::with_depth(depth.unwrap_or(ex.depth_limit));
        let states = live.entry((s.exercise.clone(), s.dialog.clone())).or_insert_with(|| initial_states(ex));
        let r = reconstruct_step(states, &step, &theory, limits);
        if r.verdict == Verdict::Verified {
            *states = r.successors.into_iter().map(|x| x.state).collect();
        }
        let verdict = r.verdict;
        let verified = verdict == Verdict::Verified;
        match (s.gold, verified) {
            (Gold::Correct, true) => counts.correct_verified += 1,
            (Gold::Correct, false) => counts.correct_rejected += 1,
            (Gold::Incorrect, true) => counts.incorrect_verified += 1,
            (Gold::Incorrect, false) => counts.incorrect_rejected += 1,
        }
        steps.push(StepVerdict {
            line: s.line,
            exercise: s.exercise.clone(),
            dialog: s.dialog.clone(),
            gold: s.gold,
            verified,
            verdict: match verdict {
                Verdict::Verified => "verified".into(),
                Verdict::Rejected => "rejected".into(),
                Verdict::Buggy { rule, .. } => format!("rejected (buggy: {rule})"),
                Verdict::ResourceExhausted => "rejected (search limit)".into(),
            },
            text: s.text.clone(),
        });
    }
    malformed.sort_by_key(|m| m.line);
    EvalReport { depth, counts, steps, malformed }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.counts;
        if let Some(d) = self.depth {
            writeln!(f, "depth limit {d}")?;
        }
        writeln!(f, "{:<12}{:>10}{:>10}{:>8}", "", "Verified", "Rejected", "Total")?;
        writeln!(
            f,
            "{:<12}{:>10}{:>10}{:>8}",
            "correct",
            c.correct_verified,
            c.correct_rejected,
            c.correct_verified + c.correct_rejected
        )?;
        writeln!(
            f,
            "{:<12}{:>10}{:>10}{:>8}",
            "incorrect",
            c.incorrect_verified,
            c.incorrect_rejected,
            c.incorrect_verified + c.incorrect_rejected
        )?;
        writeln!(
            f,
            "{:<12}{:>10}{:>10}{:>8}",
            "total",
            c.correct_verified + c.incorrect_verified,
            c.correct_rejected + c.incorrect_rejected,
            c.total()
        )?;
        if !self.malformed.is_empty() {
            writeln!(f, "skipped {} malformed line(s):", self.malformed.len())?;
            for m in &self.malformed {
                writeln!(f, "  line {}: {}", m.line, m.message)?;
            }
        }
        Ok(())
    }
}

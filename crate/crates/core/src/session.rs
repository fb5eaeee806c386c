//! Tutoring sessions: step feedback, hint requests and the bundled library.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Serialize, Serializer};

use crate::granularity::{
    classify, extract_features, parse_classifier, ClassifierError, Granularity, GranularityClassifier,
    GranularityFeatures, StudentModel,
};
use crate::hint::{generate_hint, parse_templates, Hint, TemplateError, TemplateSet};
use crate::logic::Formula;
use crate::reconstruction::{
    check_relevance, initial_states, reconstruct_step, Interpretation, MentalProofState, Relevance, SearchLimits,
    Verdict,
};
use crate::rules::{Direction, RuleSet};
use crate::script::{parse_step, ProofStep};
use crate::strategy::{run_strategy_from, HierarchicalProofPlan, DEFAULT_BUDGET};
use crate::theory::{parse_exercise, parse_theory, AssertionKind, Exercise, HintStyle, Theory, TheoryError};

const BUNDLED_THEORIES: &[&str] = &[include_str!("../data/relations.thy"), include_str!("../data/relations-bugs.thy")];
const BUNDLED_EXERCISES: &[&str] = &[include_str!("../data/rel-inv-comp.ex"), include_str!("../data/rel-union-comp.ex")];
const BUNDLED_CLASSIFIERS: &[(&str, &str)] =
    &[("standard", include_str!("../data/standard.tree")), ("novice", include_str!("../data/novice.tree"))];
const SOCRATIC: &str = include_str!("../data/socratic.tpl");
const DIDACTIC: &str = include_str!("../data/didactic.tpl");
pub const MINI_CORPUS: &str = include_str!("../data/mini-corpus.txt");

#[derive(Debug, thiserror::Error)]
pub enum LibraryError {
    #[error("{file}: {source}")]
    Theory { file: String, source: TheoryError },
    #[error("{file}: {source}")]
    Classifier { file: String, source: ClassifierError },
    #[error("{file}: {source}")]
    Templates { file: String, source: TemplateError },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Theories, exercises, classifiers and hint templates available to sessions.
#[derive(Clone, Debug)]
pub struct Library {
    pub theories: BTreeMap<String, Theory>,
    pub exercises: BTreeMap<String, Exercise>,
    pub classifiers: BTreeMap<String, GranularityClassifier>,
    pub socratic: TemplateSet,
    pub didactic: TemplateSet,
}

impl Library {
    pub fn bundled() -> Self {
        let mut lib = Library {
            theories: BTreeMap::new(),
            exercises: BTreeMap::new(),
            classifiers: BTreeMap::new(),
            socratic: parse_templates(SOCRATIC).expect("bundled templates parse"),
            didactic: parse_templates(DIDACTIC).expect("bundled templates parse"),
        };
        for text in BUNDLED_THEORIES {
            let t = parse_theory(text).expect("bundled theory parses");
            lib.theories.insert(t.name.clone(), t);
        }
        for text in BUNDLED_EXERCISES {
            let e = parse_exercise(text, &lib.theories).expect("bundled exercise parses");
            lib.exercises.insert(e.id.clone(), e);
        }
        for (name, text) in BUNDLED_CLASSIFIERS {
            lib.classifiers.insert(name.to_string(), parse_classifier(text).expect("bundled classifier parses"));
        }
        lib
    }

    /// The bundled library overlaid with the files of `dir`: `*.thy`, `*.ex`,
    /// classifiers (`*.tree`, `*.rules`, `*.linear`) and `socratic.tpl`/`didactic.tpl`.
    pub fn with_dir(dir: impl AsRef<Path>) -> Result<Self, LibraryError> {
        let dir = dir.as_ref();
        let mut lib = Library::bundled();
        let io = |p: &Path, e: std::io::Error| LibraryError::Io { path: p.display().to_string(), message: e.to_string() };
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| io(dir, e))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| io(p, e));
        let ext = |p: &Path| p.extension().and_then(|e| e.to_str()).unwrap_or("").to_string();
        let stem = |p: &Path| p.file_stem().and_then(|e| e.to_str()).unwrap_or("").to_string();
        let file = |p: &Path| p.display().to_string();
        for p in files.iter().filter(|p| ext(p) == "thy") {
            let t = parse_theory(&read(p)?).map_err(|source| LibraryError::Theory { file: file(p), source })?;
            lib.theories.insert(t.name.clone(), t);
        }
        for p in &files {
            match ext(p).as_str() {
                "ex" => {
                    let e = parse_exercise(&read(p)?, &lib.theories)
                        .map_err(|source| LibraryError::Theory { file: file(p), source })?;
                    lib.exercises.insert(e.id.clone(), e);
                }
                "tree" | "rules" | "linear" => {
                    let c = parse_classifier(&read(p)?)
                        .map_err(|source| LibraryError::Classifier { file: file(p), source })?;
                    lib.classifiers.insert(stem(p), c);
                }
                "tpl" => {
                    let t = parse_templates(&read(p)?)
                        .map_err(|source| LibraryError::Templates { file: file(p), source })?;
                    match stem(p).as_str() {
                        "socratic" => lib.socratic = t,
                        "didactic" => lib.didactic = t,
                        _ => {}
                    }
                }
                _ => {}
            }
        }
        Ok(lib)
    }

    pub fn exercise(&self, id: &str) -> Option<&Exercise> {
        self.exercises.get(id)
    }

    /// The exercise's theory with the buggy rules of `<theory>-bugs` merged in.
    pub fn theory_for(&self, ex: &Exercise) -> Theory {
        let mut t = self.theories.get(&ex.theory).cloned().unwrap_or_else(|| Theory::empty(&ex.theory));
        if let Some(bugs) = self.theories.get(&format!("{}-bugs", ex.theory)) {
            let _ = t.merge_buggy(bugs);
        }
        t
    }

    pub fn classifier_for(&self, ex: &Exercise) -> Option<&GranularityClassifier> {
        self.classifiers.get(&ex.classifier)
    }

    pub fn templates(&self, style: HintStyle) -> &TemplateSet {
        match style {
            HintStyle::Socratic => &self.socratic,
            HintStyle::Didactic => &self.didactic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Soundness {
    Correct,
    Incorrect,
    Buggy { rule: String, message: String },
    Unknown { diagnostic: String },
}

impl Soundness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Soundness::Correct => "correct",
            Soundness::Incorrect => "incorrect",
            Soundness::Buggy { .. } => "buggy",
            Soundness::Unknown { .. } => "unknown",
        }
    }
}

impl Serialize for Soundness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

fn granularity_str<S: Serializer>(g: &Option<Granularity>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(g.map_or("not_applicable", Granularity::as_str))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeedbackVector {
    pub soundness: Soundness,
    #[serde(serialize_with = "granularity_str")]
    pub granularity: Option<Granularity>,
    pub relevance: Relevance,
}

impl FeedbackVector {
    fn unsound(soundness: Soundness) -> Self {
        FeedbackVector { soundness, granularity: None, relevance: Relevance::Unknown }
    }
}

impl fmt::Display for FeedbackVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {} / {}",
            self.soundness.as_str(),
            self.granularity.map_or("not_applicable", Granularity::as_str),
            match self.relevance {
                Relevance::Relevant => "relevant",
                Relevance::Irrelevant => "irrelevant",
                Relevance::Unknown => "unknown",
            }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepOutcome {
    pub feedback: FeedbackVector,
    pub messages: Vec<String>,
    pub proof_complete: bool,
    pub interpretations: usize,
    pub trace: Vec<String>,
    pub features: Option<GranularityFeatures>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TranscriptEntry {
    Step { text: String, feedback: FeedbackVector, messages: Vec<String> },
    Hint { hint: Hint },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("unknown exercise '{0}'")]
    UnknownExercise(String),
    #[error("unknown session '{0}'")]
    UnknownSession(String),
    #[error("proof already complete")]
    ProofComplete,
}

pub const MSG_CORRECT: &str = "correct";
pub const MSG_INCORRECT: &str = "incorrect";
pub const MSG_TOO_BIG: &str = "This step is too big. Try to show some intermediate steps.";
pub const MSG_TOO_SMALL: &str = "This step is rather small. You may combine it with the next steps.";
pub const MSG_IRRELEVANT: &str = "This step does not seem to help you towards the goal.";

#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub exercise: Exercise,
    pub theory: Theory,
    pub classifier: Option<GranularityClassifier>,
    pub templates: TemplateSet,
    pub states: Vec<MentalProofState>,
    pub model: StudentModel,
    pub hint_position: usize,
    plan_cache: Option<(String, Option<HierarchicalProofPlan>)>,
    pub transcript: Vec<TranscriptEntry>,
    pub proof_complete: bool,
}

/// Serializable view of a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub exercise: String,
    pub goal: String,
    pub sequents: Vec<String>,
    pub marked: usize,
    pub proof_complete: bool,
    pub transcript: Vec<TranscriptEntry>,
}

impl Session {
    pub fn new(id: impl Into<String>, exercise: &Exercise, library: &Library) -> Self {
        Session {
            id: id.into(),
            exercise: exercise.clone(),
            theory: library.theory_for(exercise),
            classifier: library.classifier_for(exercise).cloned(),
            templates: library.templates(exercise.hint_style).clone(),
            states: initial_states(exercise),
            model: StudentModel::new(exercise.mastery_threshold),
            hint_position: 0,
            plan_cache: None,
            transcript: Vec::new(),
            proof_complete: false,
        }
    }

    pub fn limits(&self) -> SearchLimits {
        SearchLimits::with_depth(self.exercise.depth_limit)
    }

    pub fn current(&self) -> &MentalProofState {
        &self.states[0]
    }

    pub fn view(&self) -> SessionView {
        let st = self.current();
        SessionView {
            session_id: self.id.clone(),
            exercise: self.exercise.id.clone(),
            goal: self.exercise.goal.to_string(),
            sequents: st.sequents.iter().map(|s| s.to_string()).collect(),
            marked: st.marked,
            proof_complete: self.proof_complete,
            transcript: self.transcript.clone(),
        }
    }

    pub fn submit_step(&mut self, text: &str) -> Result<StepOutcome, SessionError> {
        if self.proof_complete {
            return Err(SessionError::ProofComplete);
        }
        let outcome = match parse_step(text) {
            Err(e) => {
                let diagnostic = format!("cannot read the step: {e}");
                StepOutcome {
                    feedback: FeedbackVector::unsound(Soundness::Unknown { diagnostic: diagnostic.clone() }),
                    messages: vec![diagnostic],
                    proof_complete: false,
                    interpretations: 0,
                    trace: Vec::new(),
                    features: None,
                }
            }
            Ok(step) => self.judge(&step),
        };
        self.transcript.push(TranscriptEntry::Step {
            text: text.to_string(),
            feedback: outcome.feedback.clone(),
            messages: outcome.messages.clone(),
        });
        Ok(outcome)
    }

    fn judge(&mut self, step: &ProofStep) -> StepOutcome {
        let result = reconstruct_step(&self.states, step, &self.theory, self.limits());
        let rejected = |soundness: Soundness, messages: Vec<String>| StepOutcome {
            feedback: FeedbackVector::unsound(soundness),
            messages,
            proof_complete: false,
            interpretations: 0,
            trace: Vec::new(),
            features: None,
        };
        match result.verdict {
            Verdict::Rejected => return rejected(Soundness::Incorrect, vec![MSG_INCORRECT.into()]),
            Verdict::ResourceExhausted => {
                let d = "the step could not be checked within the search limits".to_string();
                return rejected(Soundness::Unknown { diagnostic: d.clone() }, vec![d]);
            }
            Verdict::Buggy { rule, message } => {
                let messages = vec![format!("{MSG_INCORRECT}: {message}")];
                return rejected(Soundness::Buggy { rule, message }, messages);
            }
            Verdict::Verified => {}
        }
        let best = result
            .successors
            .iter()
            .min_by_key(|s| s.assertion_count())
            .expect("verified steps have successors");
        let trace = best.trace();
        let features = extract_features(&trace, &self.model, step);
        let granularity = self.classifier.as_ref().map(|c| classify(&features, c).verdict);
        let introduces = match best.interpretation {
            Interpretation::Assume => true,
            Interpretation::Fact | Interpretation::Lemma => {
                trace.iter().any(|a| a.direction == Direction::Backward && a.hyp_intro > 0)
            }
            _ => false,
        };
        let relevance = if introduces && !best.introduced.is_empty() {
            self.relevance(&self.states[best.origin], &best.introduced)
        } else {
            Relevance::Relevant
        };
        let mut messages = vec![MSG_CORRECT.to_string()];
        match granularity {
            Some(Granularity::TooBig) => messages.push(MSG_TOO_BIG.into()),
            Some(Granularity::TooSmall) => messages.push(MSG_TOO_SMALL.into()),
            _ => {}
        }
        if relevance == Relevance::Irrelevant {
            messages.push(MSG_IRRELEVANT.into());
        }
        self.model.update(&trace);
        let trace_names = trace.iter().map(|a| a.rule.clone()).collect();
        let interpretations = result.successors.len();
        self.states = result.successors.into_iter().map(|s| s.state).collect();
        self.proof_complete = result.proof_complete;
        self.hint_position = 0;
        self.plan_cache = None;
        StepOutcome {
            feedback: FeedbackVector { soundness: Soundness::Correct, granularity, relevance },
            messages,
            proof_complete: self.proof_complete,
            interpretations,
            trace: trace_names,
            features: Some(features),
        }
    }

    fn relevance(&self, pre: &MentalProofState, hyps: &[Formula]) -> Relevance {
        check_relevance(pre, hyps, &self.exercise.strategy, &self.theory, DEFAULT_BUDGET)
    }

    /// The strategy plan for the marked task of the current state.
    pub fn plan(&mut self) -> Option<&HierarchicalProofPlan> {
        let key = self.current().key();
        if self.plan_cache.as_ref().map(|(k, _)| k) != Some(&key) {
            let plan = compute_plan(self.current(), &self.exercise.strategy, &self.theory);
            self.plan_cache = Some((key, plan));
            self.hint_position = 0;
        }
        self.plan_cache.as_ref().and_then(|(_, p)| p.as_ref())
    }

    pub fn request_hint(&mut self) -> Result<Hint, SessionError> {
        if self.proof_complete {
            return Err(SessionError::ProofComplete);
        }
        self.plan();
        let position = self.hint_position;
        let plan = self.plan_cache.as_ref().and_then(|(_, p)| p.as_ref());
        let hint = generate_hint(plan, position, &self.templates, self.exercise.hint_style, &self.theory);
        self.hint_position += 1;
        self.transcript.push(TranscriptEntry::Hint { hint: hint.clone() });
        Ok(hint)
    }
}

/// Runs `strategy` from the marked task of `state` without buggy rules.
pub fn compute_plan(state: &MentalProofState, strategy: &str, theory: &Theory) -> Option<HierarchicalProofPlan> {
    let task = state.marked_sequent()?;
    let mut sound = theory.clone();
    sound.assertions.retain(|a| a.kind != AssertionKind::Buggy);
    let rules = RuleSet::from_theory(&sound);
    run_strategy_from(strategy, task, &theory.strategies, &rules, state.fresh(), DEFAULT_BUDGET).plan
}

/// Concurrent sessions, each serialized behind its own lock.
#[derive(Debug)]
pub struct SessionManager {
    library: Library,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next: Mutex<u64>,
}

impl SessionManager {
    pub fn new(library: Library) -> Self {
        SessionManager { library, sessions: Mutex::new(HashMap::new()), next: Mutex::new(1) }
    }

    pub fn library(&self) -> &Library {
        &self.library
    }

    pub fn create(&self, exercise: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        let ex = self.library.exercise(exercise).ok_or_else(|| SessionError::UnknownExercise(exercise.into()))?;
        let id = {
            let mut n = self.next.lock().expect("session counter lock");
            let id = format!("s{n}");
            *n += 1;
            id
        };
        let session = Arc::new(Mutex::new(Session::new(id.clone(), ex, &self.library)));
        self.sessions.lock().expect("session table lock").insert(id, session.clone());
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .lock()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.into()))
    }
}

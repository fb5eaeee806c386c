use std::sync::Arc;

use tutor_core::eval::parse_corpus;
use tutor_core::granularity::Granularity;
use tutor_core::reconstruction::Relevance;
use tutor_core::session::{
    Library, Session, SessionError, SessionManager, Soundness, TranscriptEntry, MINI_CORPUS, MSG_CORRECT,
    MSG_IRRELEVANT, MSG_TOO_BIG, MSG_TOO_SMALL,
};
use tutor_core::theory::parse_exercise;

const FIRST: &str = "let (x,y) in inv(comp(R,S))";
const REVERSED: &str = "hence (y,x) in comp(S,R)";

fn session(id: &str) -> (Library, Session) {
    let lib = Library::bundled();
    let s = Session::new("t", lib.exercise(id).unwrap(), &lib);
    (lib, s)
}

#[test]
fn correct_appropriate_steps_only_say_correct() {
    let (_, mut s) = session("rel-inv-comp");
    let o = s.submit_step(FIRST).unwrap();
    assert_eq!(o.feedback.soundness, Soundness::Correct);
    assert_eq!(o.feedback.granularity, Some(Granularity::Appropriate));
    assert_eq!(o.feedback.relevance, Relevance::Relevant);
    assert_eq!(o.messages, [MSG_CORRECT]);
    assert_eq!(o.trace, ["Def-eq-bwd", "Def-subset-bwd"]);
    assert_eq!(o.feedback.to_string(), "correct / appropriate / relevant");
}

#[test]
fn coarse_steps_get_the_granularity_message() {
    let (_, mut s) = session("rel-union-comp");
    s.submit_step("(a,b) in union(R,S) <-> (a,b) in R \\/ (a,b) in S").unwrap();
    let o = s.submit_step("exists x. (a,x) in union(R,S) /\\ (x,b) in T").unwrap();
    assert_eq!(o.feedback.to_string(), "correct / too_big / relevant");
    assert_eq!(o.messages, [MSG_CORRECT, MSG_TOO_BIG]);
}

#[test]
fn rejected_steps_leave_the_session_unchanged() {
    let (_, mut s) = session("rel-inv-comp");
    s.submit_step(FIRST).unwrap();
    s.request_hint().unwrap();
    let (states, model, position) = (s.states.clone(), s.model.clone(), s.hint_position);
    let o = s.submit_step(REVERSED).unwrap();
    assert_eq!(
        o.feedback.soundness,
        Soundness::Buggy {
            rule: "inv-comp-buggy".into(),
            message: "inverse reverses the order of composition".into()
        }
    );
    assert_eq!(o.feedback.granularity, None);
    assert_eq!(o.feedback.relevance, Relevance::Unknown);
    assert_eq!(o.messages, ["incorrect: inverse reverses the order of composition"]);
    assert_eq!(o.feedback.to_string(), "buggy / not_applicable / unknown");
    assert_eq!(s.states, states);
    assert_eq!(s.model, model);
    assert_eq!(s.hint_position, position);
}

#[test]
fn unreadable_steps_are_unknown_not_incorrect() {
    let (_, mut s) = session("rel-inv-comp");
    let before = s.states.clone();
    let o = s.submit_step("let (x,y in").unwrap();
    let Soundness::Unknown { diagnostic } = &o.feedback.soundness else { panic!("{:?}", o.feedback) };
    assert!(diagnostic.starts_with("cannot read the step"));
    assert_eq!(o.messages, [diagnostic.clone()]);
    assert_eq!(s.states, before);
}

#[test]
fn replaying_a_transcript_reproduces_the_feedback() {
    let steps = [FIRST, REVERSED, "hence (y,x) in comp(R,S)", "nonsense ((", "trivial"];
    let run = || {
        let (_, mut s) = session("rel-inv-comp");
        for t in steps {
            s.submit_step(t).unwrap();
            s.request_hint().unwrap();
        }
        s.view()
    };
    let first = run();
    assert_eq!(first, run());
    let kinds: Vec<bool> = first.transcript.iter().map(|e| matches!(e, TranscriptEntry::Step { .. })).collect();
    assert_eq!(kinds, [true, false].repeat(steps.len()));
}

#[test]
fn messages_follow_the_feedback_policy_across_the_corpus() {
    let lib = Library::bundled();
    let corpus = parse_corpus(MINI_CORPUS);
    for (ex, dialog) in corpus.steps.iter().map(|c| (c.exercise.clone(), c.dialog.clone())).collect::<std::collections::BTreeSet<_>>() {
        let mut s = Session::new("p", lib.exercise(&ex).unwrap(), &lib);
        for step in corpus.steps.iter().filter(|c| c.exercise == ex && c.dialog == dialog) {
            let o = s.submit_step(&step.text).unwrap();
            let fb = &o.feedback;
            let has = |m: &str| o.messages.iter().any(|x| x == m);
            assert_eq!(has(MSG_TOO_BIG), fb.granularity == Some(Granularity::TooBig), "{}", step.text);
            assert_eq!(has(MSG_TOO_SMALL), fb.granularity == Some(Granularity::TooSmall), "{}", step.text);
            assert_eq!(has(MSG_IRRELEVANT), fb.relevance == Relevance::Irrelevant, "{}", step.text);
            if fb.soundness != Soundness::Correct {
                assert_eq!((fb.granularity, fb.relevance), (None, Relevance::Unknown));
            }
        }
    }
}

fn trivial_library() -> Library {
    let mut lib = Library::bundled();
    let ex = parse_exercise("exercise refl in relations\ngoal: R subset R\n", &lib.theories).unwrap();
    lib.exercises.insert(ex.id.clone(), ex);
    lib
}

#[test]
fn finished_proofs_refuse_further_requests() {
    let lib = trivial_library();
    let mut s = Session::new("c", lib.exercise("refl").unwrap(), &lib);
    let o = s.submit_step("let (a,b) in R").unwrap();
    assert_eq!(o.feedback.soundness, Soundness::Correct);
    assert!(o.proof_complete);
    assert!(s.view().sequents.is_empty());
    assert_eq!(s.submit_step("trivial"), Err(SessionError::ProofComplete));
    let err = s.request_hint().unwrap_err();
    assert_eq!(err.to_string(), "proof already complete");
}

#[test]
fn the_state_view_lists_open_tasks() {
    let (_, mut s) = session("rel-inv-comp");
    assert_eq!(s.view().sequents, ["T0: |- inv(comp(R,S)) = comp(inv(S),inv(R))"]);
    s.submit_step(FIRST).unwrap();
    let v = s.view();
    assert_eq!(v.sequents.len(), 2);
    assert!(v.sequents[v.marked].ends_with("(x,y) in inv(comp(R,S)) |- (x,y) in comp(inv(S),inv(R))"));
}

#[test]
fn manager_hands_out_sequential_ids() {
    let m = Arc::new(SessionManager::new(Library::bundled()));
    let a = m.create("rel-inv-comp").unwrap();
    let b = m.create("rel-union-comp").unwrap();
    assert_eq!(a.lock().unwrap().id, "s1");
    assert_eq!(b.lock().unwrap().id, "s2");
    assert!(Arc::ptr_eq(&m.get("s1").unwrap(), &a));
    assert_eq!(m.get("s9").unwrap_err(), SessionError::UnknownSession("s9".into()));
    assert_eq!(m.create("nope").unwrap_err(), SessionError::UnknownExercise("nope".into()));
}

#[test]
fn sessions_run_concurrently() {
    let m = Arc::new(SessionManager::new(Library::bundled()));
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let m = m.clone();
            std::thread::spawn(move || {
                let s = m.create("rel-inv-comp").unwrap();
                let mut s = s.lock().unwrap();
                s.submit_step(FIRST).unwrap().feedback.to_string()
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), "correct / appropriate / relevant");
    }
}

#[test]
fn theory_directories_extend_the_library() {
    let dir = std::env::temp_dir().join(format!("tutor-session-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("refl.ex"), "exercise refl in relations\ngoal: R subset R\nclassifier: strict\n").unwrap();
    std::fs::write(dir.join("strict.rules"), "rules\nif total >= 1 then too_big\ndefault appropriate\n").unwrap();
    let lib = Library::with_dir(&dir).unwrap();
    assert!(lib.exercise("rel-inv-comp").is_some());
    let mut s = Session::new("d", lib.exercise("refl").unwrap(), &lib);
    assert_eq!(s.submit_step("let (a,b) in R").unwrap().feedback.granularity, Some(Granularity::TooBig));
    std::fs::remove_dir_all(&dir).unwrap();
}

mod common;

use common::script::arb_step;

use proptest::prelude::*;
use tutor_core::logic::{parse_formula, ArityTable, Formula, Pred, Term};
use tutor_core::script::{
    parse_script, parse_step, render_step, Goal, ProofStep, SetValue,
};

fn f(s: &str) -> Formula {
    parse_formula(s, &ArityTable::default()).unwrap()
}

#[test]
fn let_is_assume() {
    let step = parse_step("let (x,y) in inv(comp(R,S))").unwrap();
    assert_eq!(step, ProofStep::Assume { hyps: vec![f("(x,y) in inv(comp(R,S))")], from: vec![], thus: None });
    assert_eq!(step, parse_step("assume (x,y) in inv(comp(R,S))").unwrap());
}

#[test]
fn hence_is_fact() {
    let a = parse_step("hence (y,x) in comp(R,S)").unwrap();
    let b = parse_step("(y,x) in comp(R,S)").unwrap();
    assert_eq!(a, b);
    assert!(matches!(a, ProofStep::Fact { by: None, .. }));
}

#[test]
fn subgoals_two_goals() {
    let step = parse_step(
        "subgoals subgoal inv(comp(R,S)) subset comp(inv(S),inv(R)) subgoal inv(comp(R,S)) supset comp(inv(S),inv(R))",
    )
    .unwrap();
    match step {
        ProofStep::Subgoals { goals, by: None } => {
            assert_eq!(goals.len(), 2);
            assert_eq!(goals[1].formula, f("inv(comp(R,S)) supset comp(inv(S),inv(R))"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn trivial_with_justification() {
    assert_eq!(
        parse_step("trivial by Def-inv from h1").unwrap(),
        ProofStep::Trivial { by: Some("Def-inv".into()), from: vec!["h1".into()] }
    );
}

#[test]
fn subgoal_using() {
    assert_eq!(
        parse_step("subgoal A subset B using A = B by Def-eq").unwrap(),
        ProofStep::Subgoal(Goal { formula: f("A subset B"), using: vec![f("A = B")], by: Some("Def-eq".into()) })
    );
}

#[test]
fn two_step_script() {
    let s = parse_script("proof let (x,y) in inv(comp(R,S)); hence (y,x) in comp(R,S) qed").unwrap();
    assert_eq!(s.steps.len(), 2);
    assert!(s.qed);
    assert_eq!(s.spans.len(), 2);
}

#[test]
fn empty_script() {
    let s = parse_script("").unwrap();
    assert!(s.steps.is_empty());
    assert!(!s.qed);
}

#[test]
fn relaxations_accepted() {
    let s = parse_script("assume A subset B\nB subset C\nA subset C").unwrap();
    assert_eq!(s.steps.len(), 3);
    assert!(!s.qed);
}

#[test]
fn spans_cover_step_text() {
    let text = "let (x,y) in inv(R)\nhence (y,x) in R by Def-inv";
    let s = parse_script(text).unwrap();
    assert_eq!(&text[s.spans[0].start..s.spans[0].end], "let (x,y) in inv(R)");
    assert_eq!(&text[s.spans[1].start..s.spans[1].end], "hence (y,x) in R by Def-inv");
}

#[test]
fn error_position() {
    let err = parse_script("let (x,y) in R\nhence (x,y) in").unwrap_err();
    assert_eq!(err.line, 2);
    assert_eq!(err.column, 15);
}

#[test]
fn unknown_keyword() {
    let err = parse_step("suppose A subset B").unwrap_err();
    assert!(err.message.contains("unknown keyword 'suppose'"), "{}", err.message);
}

#[test]
fn qed_must_be_last() {
    assert!(parse_script("qed\nA subset B").is_err());
}

#[test]
fn continuation_chains_on_rhs() {
    let step = parse_step(". = comp(S,R) by Def-comp").unwrap();
    let ProofStep::Fact { form, .. } = &step else { panic!() };
    let prev = f("A = inv(B)");
    assert_eq!(form.resolve(Some(&prev)).unwrap(), f("inv(B) = comp(S,R)"));
    assert_eq!(parse_step(&render_step(&step)).unwrap(), step);
}

#[test]
fn cases_nested_steps() {
    let step = parse_step("cases from h1 { (x,y) in R: (x,y) in union(R,S) } { (x,y) in S: (x,y) in union(R,S); trivial }").unwrap();
    let ProofStep::Cases { cases, from, .. } = &step else { panic!() };
    assert_eq!(from, &vec!["h1".to_string()]);
    assert_eq!(cases[1].steps.len(), 2);
    assert_eq!(parse_step(&render_step(&step)).unwrap(), step);
}

#[test]
fn set_term_and_formula() {
    let step = parse_step("set P = comp(R,S), Q = A subset ?m").unwrap();
    assert_eq!(
        step,
        ProofStep::Set(vec![
            ("P".into(), SetValue::Term(Term::comp(Term::cnst("R"), Term::cnst("S")))),
            ("Q".into(), SetValue::Formula(Formula::atom(Pred::Subset, Term::cnst("A"), Term::meta("m")))),
        ])
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn step_round_trip(step in arb_step()) {
        let text = render_step(&step);
        let back = parse_step(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e:?}")))?;
        prop_assert_eq!(back, step);
    }
}

use std::collections::BTreeMap;

use tutor_core::logic::{parse_formula, ArityTable};
use tutor_core::theory::{parse_exercise, parse_theory, AssertionKind, HintStyle, TheoryError};

const RELATIONS: &str = include_str!("../data/relations.thy");

#[test]
fn bundled_theory_loads() {
    let t = parse_theory(RELATIONS).unwrap();
    assert_eq!(t.name, "relations");
    let defs: Vec<&str> =
        t.assertions.iter().filter(|a| a.kind == AssertionKind::Definition).map(|a| a.label.as_str()).collect();
    assert_eq!(defs, ["Def-eq", "Def-subset", "Def-supset", "Def-comp", "Def-inv", "Def-union", "Def-inter"]);
    assert_eq!(t.display_name("Def-subset"), "Def ⊂");
    assert_eq!(t.display_name("Unknown"), "Unknown");
    let names: Vec<&str> = t.strategies.names().collect();
    assert_eq!(names, ["work-backward", "work-forward", "close-by-logic", "close-by-definition", "close-by-cases"]);
}

#[test]
fn rendering_reparses_to_the_same_theory() {
    let t = parse_theory(RELATIONS).unwrap();
    let again = parse_theory(&t.render()).unwrap();
    assert_eq!(again.assertions, t.assertions);
    assert_eq!(again.display, t.display);
    assert_eq!(again.strategies, t.strategies);
}

#[test]
fn buggy_assertions_need_messages() {
    let err = parse_theory("theory t\nbuggy B: forall X. X subset X\n").unwrap_err();
    assert!(matches!(err, TheoryError::MissingMessage(l) if l == "B"));
    let err = parse_theory("theory t\ndefinition D \"why\": forall X. X subset X\n").unwrap_err();
    assert!(err.to_string().contains("only buggy"));
}

#[test]
fn duplicate_labels_and_free_names_are_rejected() {
    let err = parse_theory("theory t\ntheorem A: forall X. X subset X\ntheorem A: forall X. X supset X\n").unwrap_err();
    assert!(matches!(err, TheoryError::DuplicateLabel(l) if l == "A"));
    let err = parse_theory("theory t\ntheorem A: X subset Y\n").unwrap_err();
    assert!(matches!(err, TheoryError::Syntax { line: 2, .. }), "{err}");
}

#[test]
fn continuation_lines_join_the_previous_item() {
    let t = parse_theory("theory t\ntheorem A: forall X.\n   X subset X\n").unwrap();
    assert_eq!(t.assertions[0].formula, parse_formula("forall X. X subset X", &ArityTable::default()).unwrap());
}

#[test]
fn unknown_strategy_calls_fail_to_load() {
    let err = parse_theory("theory t\nstrategy s\n  try nowhere\n").unwrap_err();
    assert!(matches!(err, TheoryError::Strategy(_)), "{err}");
}

#[test]
fn merging_bugs_keeps_the_sound_assertions() {
    let mut t = parse_theory(RELATIONS).unwrap();
    let n = t.assertions.len();
    let bugs = parse_theory(include_str!("../data/relations-bugs.thy")).unwrap();
    t.merge_buggy(&bugs).unwrap();
    assert_eq!(t.assertions.len(), n + 1);
    let b = t.assertion("inv-comp-buggy").unwrap();
    assert_eq!(b.message.as_deref(), Some("inverse reverses the order of composition"));
    assert!(matches!(t.merge_buggy(&bugs), Err(TheoryError::DuplicateLabel(_))));
}

#[test]
fn exercises_resolve_their_theory() {
    let theories = BTreeMap::from([("relations".to_string(), parse_theory(RELATIONS).unwrap())]);
    let ex = parse_exercise(include_str!("../data/rel-inv-comp.ex"), &theories).unwrap();
    assert_eq!(ex.id, "rel-inv-comp");
    assert_eq!(ex.depth_limit, 4);
    assert_eq!(ex.strategy, "close-by-definition");
    assert_eq!(ex.classifier, "standard");
    assert_eq!(ex.hint_style, HintStyle::Didactic);
    assert_eq!(ex.goal.to_string(), "inv(comp(R,S)) = comp(inv(S),inv(R))");

    let minimal = parse_exercise("exercise e in relations\ngoal: R subset R\n", &theories).unwrap();
    assert_eq!(minimal.hint_style, HintStyle::Socratic);
    assert_eq!(minimal.depth_limit, 4);

    assert!(matches!(
        parse_exercise("exercise e in sets\ngoal: R subset R\n", &theories),
        Err(TheoryError::UnknownTheory(_))
    ));
    assert!(parse_exercise("exercise e in relations\ngoal: ?X subset R\n", &theories).is_err());
    assert!(parse_exercise("exercise e in relations\ngoal: R subset R\nstrategy: guess\n", &theories).is_err());
    assert!(parse_exercise("exercise e in relations\ngoal: R subset R\ndepth: 0\n", &theories).is_err());
}

use tutor_core::hint::{
    generate_hint, instantiate_template, ladder, parse_templates, TemplateError, TemplateSet, FALLBACK_TEXT,
    NO_PLAN_TEXT,
};
use tutor_core::logic::{parse_formula, ArityTable, Formula, Hyp, Sequent};
use tutor_core::reconstruction::{initial_states, reconstruct_step, SearchLimits, Verdict};
use tutor_core::rules::{apply, Fresh};
use tutor_core::script::parse_step;
use tutor_core::session::{Library, Session, Soundness};
use tutor_core::strategy::{run_strategy, EdgeLabel, HierarchicalProofPlan};
use tutor_core::theory::{parse_theory, HintStyle, Theory};

const SETS: &str = "theory sets
display Def-eq \"Def =\"
display Def-inter \"Def ∩\"
definition Def-eq: forall X Y. X = Y <-> X subset Y /\\ X supset Y
definition Def-inter: forall X Y a. a in X /\\ a in Y <-> a in inter(X,Y)
strategy bwd
  use select * from definitions as backward
strategy fwd
  use select * from definitions as forward
";

fn f(s: &str) -> Formula {
    parse_formula(s, &ArityTable::default()).unwrap()
}

fn socratic() -> TemplateSet {
    parse_templates(include_str!("../data/socratic.tpl")).unwrap()
}

fn didactic() -> TemplateSet {
    parse_templates(include_str!("../data/didactic.tpl")).unwrap()
}

fn plan(strategy: &str, task: &Sequent, theory: &Theory) -> HierarchicalProofPlan {
    run_strategy(strategy, task, theory, 5000).plan.expect("strategy finds a plan")
}

fn first_inference(p: &HierarchicalProofPlan) -> usize {
    ladder(p, HintStyle::Socratic).into_iter().map(|(e, _)| e).find(|&e| !p.edge(e).is_strategy()).unwrap()
}

#[test]
fn backward_premises_question_on_an_equality() {
    let t = parse_theory(SETS).unwrap();
    let p = plan("bwd", &Sequent::new("T1", f("inter(A,B) = inter(B,A)")), &t);
    let e = first_inference(&p);
    assert_eq!(
        instantiate_template(&socratic(), 4, &p, e, &t).as_deref(),
        Some("If you want to show that A ∩ B = B ∩ A, what should be true about these sets?")
    );
    assert_eq!(
        instantiate_template(&socratic(), 7, &p, e, &t).as_deref(),
        Some("By the application of Def = we obtain the new goal A ∩ B ⊂ B ∩ A and A ∩ B ⊃ B ∩ A")
    );
}

#[test]
fn forward_conclusion_question_on_an_intersection() {
    let t = parse_theory(SETS).unwrap();
    let task = Sequent::with_hyps(
        "T1",
        vec![Hyp { label: "H1".into(), formula: f("x in A") }, Hyp { label: "H2".into(), formula: f("x in B") }],
        f("x in inter(A,B)"),
    );
    let p = plan("fwd", &task, &t);
    let e = first_inference(&p);
    assert_eq!(
        instantiate_template(&socratic(), 6, &p, e, &t).as_deref(),
        Some("What can you conclude if you know that x ∈ A and x ∈ B?")
    );
    assert_eq!(
        instantiate_template(&socratic(), 7, &p, e, &t).as_deref(),
        Some("By the application of Def ∩ to x ∈ A and x ∈ B we obtain x ∈ A ∩ B")
    );
}

#[test]
fn inference_templates_do_not_fill_strategy_edges() {
    let t = parse_theory(SETS).unwrap();
    let p = plan("bwd", &Sequent::new("T1", f("inter(A,B) = inter(B,A)")), &t);
    assert!(p.edge(p.top[0]).is_strategy());
    assert_eq!(instantiate_template(&socratic(), 3, &p, p.top[0], &t), None);
    // No template names `bwd`, so the strategic hint falls back.
    let h = generate_hint(Some(&p), 0, &socratic(), HintStyle::Socratic, &t);
    assert_eq!(h.text, FALLBACK_TEXT);
    assert_eq!(h.category, Some(1));
    assert!(h.strategic);
}

#[test]
fn template_parse_errors() {
    let bad = |text: &str| match parse_templates(text) {
        Err(TemplateError::Syntax { line, .. }) => line,
        other => panic!("expected a syntax error, got {other:?}"),
    };
    assert_eq!(bad("template 9 for inference: \"x\""), 1);
    assert_eq!(bad("\ntemplate 3 for inference: unquoted"), 2);
    assert_eq!(bad("template 3 for inference: \"{nonsense}\""), 1);
    assert_eq!(bad("template 1 for work-backward: \"{assertion}\""), 1);
    assert_eq!(bad("template 1 for work-backward backward: \"x\""), 1);
    assert_eq!(bad("hint 1 for inference: \"x\""), 1);
    assert_eq!(parse_templates("# only a comment\n\n").unwrap(), TemplateSet::default());
}

#[test]
fn missing_plans_get_the_encouragement_hint() {
    let t = parse_theory(SETS).unwrap();
    let h = generate_hint(None, 3, &socratic(), HintStyle::Socratic, &t);
    assert_eq!(h.text, NO_PLAN_TEXT);
    assert_eq!(h.category, None);
    assert_eq!(h.category_name(), "none");
    assert!(!h.strategic);
}

fn relations_t1() -> (HierarchicalProofPlan, Theory) {
    let t = parse_theory(include_str!("../data/relations.thy")).unwrap();
    let p = plan("close-by-definition", &Sequent::new("T1", f("inv(comp(R,S)) subset comp(inv(S),inv(R))")), &t);
    (p, t)
}

#[test]
fn ladders_never_become_less_explicit_and_bottom_out() {
    let (p, t) = relations_t1();
    for (style, templates) in [(HintStyle::Socratic, socratic()), (HintStyle::Didactic, didactic())] {
        let hints: Vec<_> = (0..8).map(|i| generate_hint(Some(&p), i, &templates, style, &t)).collect();
        for w in hints.windows(2) {
            assert!((w[0].level, w[0].category) <= (w[1].level, w[1].category), "{:?} then {:?}", w[0], w[1]);
        }
        let last = hints.last().unwrap();
        assert!(matches!(last.category, Some(7 | 8)));
        assert!(!last.text.contains('{'));
        let edge = last.edge.unwrap();
        let EdgeLabel::Inference(app) = &p.edge(edge).label else { panic!("bottom-out on a strategy edge") };
        let source = &p.node(p.edge(edge).source).sequent;
        assert!(apply(app, source, &mut Fresh::for_sequents([source])).is_ok());
        assert!(last.text.contains("Def ⊂"));
    }
}

#[test]
fn didactic_ladder_for_the_subset_task() {
    let (p, t) = relations_t1();
    let texts: Vec<String> = (0..4).map(|i| generate_hint(Some(&p), i, &didactic(), HintStyle::Didactic, &t).text).collect();
    assert_eq!(
        texts,
        [
            "Try to work backward from the goal",
            "Try to apply Def ⊂",
            "Try to apply Def ⊂ on (R∘S)⁻¹ ⊂ S⁻¹∘R⁻¹",
            "By the application of Def ⊂ we obtain the new goal (x,y) ∈ (R∘S)⁻¹ ⇒ (x,y) ∈ S⁻¹∘R⁻¹",
        ]
    );
}

#[test]
fn session_ladder_after_the_split_and_reset_on_progress() {
    let lib = Library::bundled();
    let ex = lib.exercise("rel-inv-comp").unwrap();
    let mut s = Session::new("h", ex, &lib);
    assert_eq!(s.submit_step("subgoal inv(comp(R,S)) subset comp(inv(S),inv(R))").unwrap().feedback.soundness, Soundness::Correct);
    let first: Vec<String> = (0..4).map(|_| s.request_hint().unwrap().text).collect();
    assert_eq!(first[0], "Try to work backward from the goal");
    assert_eq!(first[3], "By the application of Def ⊂ we obtain the new goal (x,y) ∈ (R∘S)⁻¹ ⇒ (x,y) ∈ S⁻¹∘R⁻¹");

    // A rejected step leaves the ladder where it was.
    assert_ne!(s.submit_step("hence (y,x) in comp(S,R)").unwrap().feedback.soundness, Soundness::Correct);
    assert_eq!(s.request_hint().unwrap().category, Some(8));

    assert_eq!(s.submit_step("let (x,y) in inv(comp(R,S))").unwrap().feedback.soundness, Soundness::Correct);
    assert_eq!(s.request_hint().unwrap().category, Some(1));
}

#[test]
fn bottom_out_hint_replays_in_the_reconstruction() {
    let lib = Library::bundled();
    let ex = lib.exercise("rel-inv-comp").unwrap();
    let theory = lib.theory_for(ex);
    let states = initial_states(ex);
    let step = parse_step("subgoal inv(comp(R,S)) subset comp(inv(S),inv(R))").unwrap();
    let r = reconstruct_step(&states, &step, &theory, SearchLimits::with_depth(4));
    assert_eq!(r.verdict, Verdict::Verified);
    let state = &r.successors[0].state;
    let task = state.marked_sequent().unwrap();
    let p = plan(&ex.strategy, task, &theory);
    let h = generate_hint(Some(&p), 99, &didactic(), HintStyle::Didactic, &theory);
    let EdgeLabel::Inference(app) = &p.edge(h.edge.unwrap()).label else { panic!() };
    assert!(state.apply(app).is_ok());
}

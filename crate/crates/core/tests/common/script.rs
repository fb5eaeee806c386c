use proptest::prelude::*;
use tutor_core::logic::Pred;
use tutor_core::script::{Case, Continuation, Goal, ProofStep, SForm, SetValue};

fn labels() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(&["h1", "h2", "h3"][..]).prop_map(String::from), 0..3)
}

fn by() -> impl Strategy<Value = Option<String>> {
    prop::option::of(prop::sample::select(&["Def-eq", "Def-inv", "Trans"][..]).prop_map(String::from))
}

fn goal() -> impl Strategy<Value = Goal> {
    (super::arb_formula(), prop::collection::vec(super::arb_formula(), 0..2), by())
        .prop_map(|(formula, using, by)| Goal { formula, using, by })
}

fn simple_step() -> impl Strategy<Value = ProofStep> {
    let f = super::arb_formula;
    prop_oneof![
        (prop::collection::vec(f(), 1..3), labels(), prop::option::of(f()))
            .prop_map(|(hyps, from, thus)| ProofStep::Assume { hyps, from, thus }),
        (f(), by(), labels()).prop_map(|(x, by, from)| ProofStep::Fact { form: SForm::Formula(x), by, from }),
        (super::arb_term(), by()).prop_map(|(t, by)| ProofStep::Fact {
            form: SForm::Continuation(Continuation::Term(Pred::Subset, t)),
            by,
            from: vec![]
        }),
        goal().prop_map(ProofStep::Subgoal),
        (prop::collection::vec(goal(), 1..3), by()).prop_map(|(goals, by)| ProofStep::Subgoals { goals, by }),
        (super::arb_term(), f()).prop_map(|(t, x)| ProofStep::Set(vec![
            ("P".into(), SetValue::Term(t)),
            ("Q".into(), SetValue::Formula(x))
        ])),
        (by(), labels()).prop_map(|(by, from)| ProofStep::Trivial { by, from }),
    ]
}

pub fn arb_step() -> impl Strategy<Value = ProofStep> {
    prop_oneof![
        3 => simple_step(),
        1 => (prop::collection::vec((super::arb_formula(), prop::collection::vec(simple_step(), 0..3)), 1..3), by(), labels())
            .prop_map(|(cs, by, from)| ProofStep::Cases {
                cases: cs.into_iter().map(|(hyp, steps)| Case { hyp, steps }).collect(),
                by,
                from
            }),
    ]
}

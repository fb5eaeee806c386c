#![allow(dead_code)]

pub mod model;
pub mod script;
pub mod unify;

use proptest::prelude::*;
use tutor_core::logic::{Formula, Pred, Term};

pub const CONSTS: &[&str] = &["R", "S", "T", "x", "y", "a", "b"];
pub const BOUND: &[&str] = &["a", "b", "c"];

pub fn arb_term_with(metas: bool) -> impl Strategy<Value = Term> {
    let leaf = if metas {
        prop_oneof![
            4 => prop::sample::select(CONSTS).prop_map(Term::cnst),
            1 => prop::sample::select(&["m", "n"][..]).prop_map(Term::meta),
        ]
        .boxed()
    } else {
        prop::sample::select(CONSTS).prop_map(Term::cnst).boxed()
    };
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::pair(a, b)),
            inner.clone().prop_map(Term::inv),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::comp(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::union(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::inter(a, b)),
        ]
    })
}

pub fn arb_term() -> impl Strategy<Value = Term> {
    arb_term_with(false)
}

fn arb_pred() -> impl Strategy<Value = Pred> {
    prop::sample::select(&[Pred::In, Pred::Eq, Pred::Subset, Pred::Supset][..])
}

fn bind_term(t: &Term, bound: &[String]) -> Term {
    match t {
        Term::Const(n) if bound.contains(n) => Term::Var(n.clone()),
        Term::Pair(a, b) => Term::pair(bind_term(a, bound), bind_term(b, bound)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| bind_term(a, bound)).collect()),
        other => other.clone(),
    }
}

/// Turns constants into bound variables under the quantifiers that name them.
pub fn bind_vars(f: &Formula, bound: &mut Vec<String>) -> Formula {
    match f {
        Formula::Atom(p, a, b) => Formula::Atom(*p, bind_term(a, bound), bind_term(b, bound)),
        Formula::Not(a) => Formula::not(bind_vars(a, bound)),
        Formula::And(a, b) => Formula::and(bind_vars(a, bound), bind_vars(b, bound)),
        Formula::Or(a, b) => Formula::or(bind_vars(a, bound), bind_vars(b, bound)),
        Formula::Implies(a, b) => Formula::implies(bind_vars(a, bound), bind_vars(b, bound)),
        Formula::Iff(a, b) => Formula::iff(bind_vars(a, bound), bind_vars(b, bound)),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            bound.push(x.clone());
            let inner = bind_vars(body, bound);
            bound.pop();
            if matches!(f, Formula::Forall(..)) {
                Formula::forall(x, inner)
            } else {
                Formula::exists(x, inner)
            }
        }
    }
}

pub fn arb_formula_with(metas: bool) -> impl Strategy<Value = Formula> {
    let atom = (arb_pred(), arb_term_with(metas), arb_term_with(metas)).prop_map(|(p, a, b)| Formula::atom(p, a, b));
    let raw = atom.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            (prop::sample::select(BOUND), inner.clone()).prop_map(|(x, f)| Formula::forall(x, f)),
            (prop::sample::select(BOUND), inner).prop_map(|(x, f)| Formula::exists(x, f)),
        ]
    });
    raw.prop_map(|f| bind_vars(&f, &mut Vec::new()))
}

pub fn arb_formula() -> impl Strategy<Value = Formula> {
    arb_formula_with(false)
}

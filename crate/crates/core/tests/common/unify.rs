use std::collections::BTreeSet;

use proptest::prelude::*;
use tutor_core::logic::{unify_term, Subst, Term};

/// Ground terms of depth at most one over a small alphabet.
pub fn universe() -> Vec<Term> {
    let atoms: Vec<Term> = ["R", "S", "x"].iter().map(|c| Term::cnst(c)).collect();
    let mut out = atoms.clone();
    for a in &atoms {
        out.push(Term::inv(a.clone()));
        for b in &atoms {
            out.push(Term::pair(a.clone(), b.clone()));
            out.push(Term::comp(a.clone(), b.clone()));
        }
    }
    out
}

pub fn metas_of(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Meta(m) => {
            out.insert(m.clone());
        }
        Term::Pair(a, b) => {
            metas_of(a, out);
            metas_of(b, out);
        }
        Term::App(_, args) => args.iter().for_each(|a| metas_of(a, out)),
        _ => {}
    }
}

pub fn ground(t: &Term, assignment: &[(String, Term)]) -> Term {
    let mut s = Subst::new();
    for (m, v) in assignment {
        assert!(s.bind(m, v.clone()));
    }
    s.apply_term(t)
}

/// Every assignment of the metas to universe terms.
pub fn assignments(metas: &[String], universe: &[Term]) -> Vec<Vec<(String, Term)>> {
    let mut out = vec![Vec::new()];
    for m in metas {
        out = out
            .into_iter()
            .flat_map(|a: Vec<(String, Term)>| {
                universe.iter().map(move |v| {
                    let mut a = a.clone();
                    a.push((m.clone(), v.clone()));
                    a
                })
            })
            .collect();
    }
    out
}

pub fn small_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        3 => prop::sample::select(&["R", "S", "x"][..]).prop_map(Term::cnst),
        2 => prop::sample::select(&["m", "n"][..]).prop_map(Term::meta),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::pair(a, b)),
            inner.clone().prop_map(Term::inv),
            (inner.clone(), inner).prop_map(|(a, b)| Term::comp(a, b)),
        ]
    })
}

/// The unifier of `a` and `b` exists iff some ground assignment equates
/// them, and every such assignment factors through it.
pub fn check_against_enumeration(a: &Term, b: &Term) -> Result<(), String> {
    let universe = universe();
    let mut ms = BTreeSet::new();
    metas_of(a, &mut ms);
    metas_of(b, &mut ms);
    let metas: Vec<String> = ms.into_iter().collect();
    let solutions: Vec<Vec<(String, Term)>> =
        assignments(&metas, &universe).into_iter().filter(|asg| ground(a, asg) == ground(b, asg)).collect();
    match unify_term(a, b) {
        None if solutions.is_empty() => Ok(()),
        None => Err(format!("missed unifier of {a} and {b}; solution {:?}", solutions[0])),
        Some(sigma) => {
            if sigma.apply_term(a) != sigma.apply_term(b) {
                return Err(format!("{sigma:?} does not unify {a} and {b}"));
            }
            for asg in &solutions {
                for (m, v) in asg {
                    let through = ground(&sigma.apply_term(&Term::meta(m)), asg);
                    if &through != v {
                        return Err(format!("{sigma:?} is not most general for {a} and {b}"));
                    }
                }
            }
            Ok(())
        }
    }
}

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::Rng;
use tutor_core::logic::{Formula, Pred, Term};
use tutor_core::rules::{Direction, InferenceRule};

/// Values over the two-element domain; relations are bitmasks over the four pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum V {
    E(u8),
    P(u8, u8),
    Rel(u8),
}

fn bit(a: u8, b: u8) -> u8 {
    1 << (a * 2 + b)
}

fn holds(r: u8, a: u8, b: u8) -> bool {
    r & bit(a, b) != 0
}

fn rel(v: V) -> u8 {
    match v {
        V::Rel(r) => r,
        other => panic!("expected a relation, got {other:?}"),
    }
}

fn pairs() -> impl Iterator<Item = (u8, u8)> {
    (0..2).flat_map(|a| (0..2).map(move |b| (a, b)))
}

fn eval_term(t: &Term, env: &BTreeMap<String, V>) -> V {
    match t {
        Term::Var(n) | Term::Const(n) | Term::Meta(n) => *env.get(n).unwrap_or_else(|| panic!("unbound {n}")),
        Term::Pair(a, b) => match (eval_term(a, env), eval_term(b, env)) {
            (V::E(x), V::E(y)) => V::P(x, y),
            other => panic!("pair of non-elements {other:?}"),
        },
        Term::App(fun, args) => {
            let rs: Vec<u8> = args.iter().map(|a| rel(eval_term(a, env))).collect();
            let out = match fun.as_str() {
                "inv" => pairs().filter(|&(a, b)| holds(rs[0], b, a)).fold(0, |m, (a, b)| m | bit(a, b)),
                "comp" => pairs()
                    .filter(|&(a, b)| (0..2).any(|z| holds(rs[0], a, z) && holds(rs[1], z, b)))
                    .fold(0, |m, (a, b)| m | bit(a, b)),
                "union" => rs[0] | rs[1],
                "inter" => rs[0] & rs[1],
                other => panic!("unknown function {other}"),
            };
            V::Rel(out)
        }
    }
}

fn in_pair(f: &Formula, name: &str) -> bool {
    fn term(t: &Term, name: &str, inside: bool) -> bool {
        match t {
            Term::Var(n) | Term::Const(n) | Term::Meta(n) => inside && n == name,
            Term::Pair(a, b) => term(a, name, true) || term(b, name, true),
            Term::App(_, args) => args.iter().any(|a| term(a, name, false)),
        }
    }
    let mut found = false;
    f.visit_terms(&mut |t| found |= term(t, name, false));
    found
}

fn domain_for(body: &Formula, name: &str) -> Vec<V> {
    if in_pair(body, name) {
        (0..2).map(V::E).collect()
    } else {
        (0..16).map(V::Rel).collect()
    }
}

pub fn eval(f: &Formula, env: &mut BTreeMap<String, V>) -> bool {
    match f {
        Formula::Atom(p, a, b) => {
            let (x, y) = (eval_term(a, env), eval_term(b, env));
            match p {
                Pred::In => match x {
                    V::P(i, j) => holds(rel(y), i, j),
                    other => panic!("membership of non-pair {other:?}"),
                },
                Pred::Eq => x == y,
                Pred::Subset => rel(x) & !rel(y) == 0,
                Pred::Supset => rel(y) & !rel(x) == 0,
            }
        }
        Formula::Not(a) => !eval(a, env),
        Formula::And(a, b) => eval(a, env) && eval(b, env),
        Formula::Or(a, b) => eval(a, env) || eval(b, env),
        Formula::Implies(a, b) => !eval(a, env) || eval(b, env),
        Formula::Iff(a, b) => eval(a, env) == eval(b, env),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let universal = matches!(f, Formula::Forall(..));
            let saved = env.get(x).copied();
            let mut result = universal;
            for v in domain_for(body, x) {
                env.insert(x.clone(), v);
                if eval(body, env) != universal {
                    result = !universal;
                    break;
                }
            }
            match saved {
                Some(v) => env.insert(x.clone(), v),
                None => env.remove(x),
            };
            result
        }
    }
}

fn rule_formulas(r: &InferenceRule) -> Vec<&Formula> {
    r.premises.iter().chain([&r.conclusion]).collect()
}

fn metas(r: &InferenceRule) -> BTreeSet<String> {
    rule_formulas(r).into_iter().flat_map(|f| f.metas()).collect()
}

pub fn random_env(r: &InferenceRule, rng: &mut StdRng) -> BTreeMap<String, V> {
    metas(r)
        .into_iter()
        .map(|m| {
            let element = rule_formulas(r).iter().any(|f| in_pair(f, &m));
            let v = if element { V::E(rng.gen_range(0..2)) } else { V::Rel(rng.gen_range(0..16)) };
            (m, v)
        })
        .collect()
}

/// Premises entail the conclusion (forward), the new goal entails the old (backward),
/// or the goal pattern holds outright (close).
pub fn sound_in(r: &InferenceRule, env: &mut BTreeMap<String, V>) -> bool {
    match r.direction {
        Direction::Forward => !r.premises.iter().all(|p| eval(p, env)) || eval(&r.conclusion, env),
        Direction::Backward => !eval(&r.premises[0], env) || eval(&r.conclusion, env),
        Direction::Close => eval(&r.conclusion, env),
    }
}

use super::subst::Subst;
use super::syntax::{Formula, Term};

/// Binder correspondences between the left and right formula, innermost last.
type Env = Vec<(String, String)>;

fn lookup_left(env: &Env, v: &str) -> Option<usize> {
    env.iter().rposition(|(l, _)| l == v)
}

fn lookup_right(env: &Env, v: &str) -> Option<usize> {
    env.iter().rposition(|(_, r)| r == v)
}

fn mentions_bound(t: &Term, env: &Env, left: bool) -> bool {
    match t {
        Term::Var(v) => {
            if left {
                lookup_left(env, v).is_some()
            } else {
                lookup_right(env, v).is_some()
            }
        }
        Term::Const(_) | Term::Meta(_) => false,
        Term::Pair(a, b) => mentions_bound(a, env, left) || mentions_bound(b, env, left),
        Term::App(_, args) => args.iter().any(|a| mentions_bound(a, env, left)),
    }
}

fn unify_terms(a: &Term, b: &Term, s: &mut Subst, env: &Env) -> bool {
    match (a, b) {
        (Term::Meta(m), _) if s.get(m).is_some() => {
            let bound = s.get(m).cloned().expect("checked");
            unify_terms(&bound, b, s, env)
        }
        (_, Term::Meta(m)) if s.get(m).is_some() => {
            let bound = s.get(m).cloned().expect("checked");
            unify_terms(a, &bound, s, env)
        }
        (Term::Meta(m), Term::Meta(n)) if m == n => true,
        (Term::Meta(m), _) => !mentions_bound(b, env, false) && s.bind(m, b.clone()),
        (_, Term::Meta(n)) => !mentions_bound(a, env, true) && s.bind(n, a.clone()),
        (Term::Var(x), Term::Var(y)) => match (lookup_left(env, x), lookup_right(env, y)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        },
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Pair(a1, a2), Term::Pair(b1, b2)) => unify_terms(a1, b1, s, env) && unify_terms(a2, b2, s, env),
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify_terms(x, y, s, env))
        }
        _ => false,
    }
}

fn unify_formulas(a: &Formula, b: &Formula, s: &mut Subst, env: &mut Env) -> bool {
    match (a, b) {
        (Formula::Atom(p, a1, a2), Formula::Atom(q, b1, b2)) => {
            p == q && unify_terms(a1, b1, s, env) && unify_terms(a2, b2, s, env)
        }
        (Formula::Not(x), Formula::Not(y)) => unify_formulas(x, y, s, env),
        (Formula::And(a1, a2), Formula::And(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Implies(a1, a2), Formula::Implies(b1, b2))
        | (Formula::Iff(a1, a2), Formula::Iff(b1, b2)) => {
            unify_formulas(a1, b1, s, env) && unify_formulas(a2, b2, s, env)
        }
        (Formula::Forall(x, f), Formula::Forall(y, g)) | (Formula::Exists(x, f), Formula::Exists(y, g)) => {
            env.push((x.clone(), y.clone()));
            let ok = unify_formulas(f, g, s, env);
            env.pop();
            ok
        }
        _ => false,
    }
}

/// Most general unifier of two formulas, treating only meta-variables as
/// placeholders. Bound variables are compared up to renaming.
pub fn unify(f1: &Formula, f2: &Formula) -> Option<Subst> {
    let mut s = Subst::new();
    unify_with(f1, f2, &mut s).then_some(s)
}

/// Extends `s` so that it unifies `f1` and `f2`; on failure `s` may hold
/// partial bindings and should be discarded.
pub fn unify_with(f1: &Formula, f2: &Formula, s: &mut Subst) -> bool {
    unify_formulas(f1, f2, s, &mut Vec::new())
}

pub fn unify_term(t1: &Term, t2: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    unify_terms(t1, t2, &mut s, &Vec::new()).then_some(s)
}

fn match_terms(p: &Term, t: &Term, s: &mut Subst, env: &Env) -> bool {
    match (p, t) {
        (Term::Meta(m), _) => match s.get(m) {
            Some(bound) => alpha_eq_terms(bound, t, env),
            None => {
                if mentions_bound(t, env, false) {
                    return false;
                }
                s.insert_raw(m, t.clone());
                true
            }
        },
        (Term::Var(x), Term::Var(y)) => match (lookup_left(env, x), lookup_right(env, y)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        },
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Pair(a1, a2), Term::Pair(b1, b2)) => match_terms(a1, b1, s, env) && match_terms(a2, b2, s, env),
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_terms(x, y, s, env))
        }
        _ => false,
    }
}

fn alpha_eq_terms(a: &Term, b: &Term, env: &Env) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match (lookup_left(env, x), lookup_right(env, y)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        },
        (Term::Pair(a1, a2), Term::Pair(b1, b2)) => alpha_eq_terms(a1, b1, env) && alpha_eq_terms(a2, b2, env),
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_eq_terms(x, y, env))
        }
        _ => a == b,
    }
}

fn match_formulas(p: &Formula, t: &Formula, s: &mut Subst, env: &mut Env) -> bool {
    match (p, t) {
        (Formula::Atom(x, p1, p2), Formula::Atom(y, t1, t2)) => {
            x == y && match_terms(p1, t1, s, env) && match_terms(p2, t2, s, env)
        }
        (Formula::Not(x), Formula::Not(y)) => match_formulas(x, y, s, env),
        (Formula::And(a1, a2), Formula::And(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Implies(a1, a2), Formula::Implies(b1, b2))
        | (Formula::Iff(a1, a2), Formula::Iff(b1, b2)) => {
            match_formulas(a1, b1, s, env) && match_formulas(a2, b2, s, env)
        }
        (Formula::Forall(x, f), Formula::Forall(y, g)) | (Formula::Exists(x, f), Formula::Exists(y, g)) => {
            env.push((x.clone(), y.clone()));
            let ok = match_formulas(f, g, s, env);
            env.pop();
            ok
        }
        _ => false,
    }
}

/// One-way matching: only meta-variables of `pattern` are bound; meta-variables
/// in `target` are treated as rigid symbols.
pub fn match_formula(pattern: &Formula, target: &Formula, s: &mut Subst) -> bool {
    match_formulas(pattern, target, s, &mut Vec::new())
}

pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    fn go(a: &Formula, b: &Formula, env: &mut Env) -> bool {
        match (a, b) {
            (Formula::Atom(x, a1, a2), Formula::Atom(y, b1, b2)) => {
                x == y && alpha_eq_terms(a1, b1, env) && alpha_eq_terms(a2, b2, env)
            }
            (Formula::Not(x), Formula::Not(y)) => go(x, y, env),
            (Formula::And(a1, a2), Formula::And(b1, b2))
            | (Formula::Or(a1, a2), Formula::Or(b1, b2))
            | (Formula::Implies(a1, a2), Formula::Implies(b1, b2))
            | (Formula::Iff(a1, a2), Formula::Iff(b1, b2)) => go(a1, b1, env) && go(a2, b2, env),
            (Formula::Forall(x, f), Formula::Forall(y, g)) | (Formula::Exists(x, f), Formula::Exists(y, g)) => {
                env.push((x.clone(), y.clone()));
                let ok = go(f, g, env);
                env.pop();
                ok
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// A string that is identical for alpha-equivalent formulas.
pub fn alpha_key(f: &Formula) -> String {
    fn term(t: &Term, bound: &[String], out: &mut String) {
        match t {
            Term::Var(v) => match bound.iter().rposition(|b| b == v) {
                Some(i) => {
                    out.push('#');
                    out.push_str(&(bound.len() - 1 - i).to_string());
                }
                None => {
                    out.push('!');
                    out.push_str(v);
                }
            },
            Term::Const(c) => out.push_str(c),
            Term::Meta(m) => {
                out.push('?');
                out.push_str(m);
            }
            Term::Pair(a, b) => {
                out.push('(');
                term(a, bound, out);
                out.push(',');
                term(b, bound, out);
                out.push(')');
            }
            Term::App(f, args) => {
                out.push_str(f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    term(a, bound, out);
                }
                out.push(')');
            }
        }
    }
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut String) {
        match f {
            Formula::Atom(p, a, b) => {
                out.push('[');
                term(a, bound, out);
                out.push(' ');
                out.push_str(p.ascii());
                out.push(' ');
                term(b, bound, out);
                out.push(']');
            }
            Formula::Not(g) => {
                out.push('~');
                go(g, bound, out);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                out.push(match f {
                    Formula::And(..) => '&',
                    Formula::Or(..) => '|',
                    Formula::Implies(..) => '>',
                    _ => '=',
                });
                out.push('(');
                go(a, bound, out);
                out.push(',');
                go(b, bound, out);
                out.push(')');
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                out.push(if matches!(f, Formula::Forall(..)) { 'A' } else { 'E' });
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = String::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::syntax::{Formula, Term};

/// A finite map from meta-variable names to terms, kept idempotent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subst {
    map: BTreeMap<String, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, meta: &str) -> Option<&Term> {
        self.map.get(meta)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    /// Binds `meta` to `t`, resolving `t` first and propagating the new binding
    /// through existing ranges. Fails on an occurs-check violation.
    pub fn bind(&mut self, meta: &str, t: Term) -> bool {
        let t = self.apply_term(&t);
        if t == Term::Meta(meta.to_string()) {
            return true;
        }
        if t.contains_meta(meta) {
            return false;
        }
        let single: BTreeMap<String, Term> = [(meta.to_string(), t.clone())].into();
        for v in self.map.values_mut() {
            *v = replace_metas_term(v, &single);
        }
        self.map.insert(meta.to_string(), t);
        true
    }

    /// Inserts a binding without resolution; callers guarantee idempotence.
    pub(crate) fn insert_raw(&mut self, meta: &str, t: Term) {
        self.map.insert(meta.to_string(), t);
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        replace_metas_term(t, &self.map)
    }

    /// Capture-avoiding application to a formula.
    pub fn apply(&self, f: &Formula) -> Formula {
        if self.map.is_empty() {
            return f.clone();
        }
        let relevant: BTreeMap<String, Term> = f
            .metas()
            .into_iter()
            .filter_map(|m| self.map.get(&m).map(|t| (m, t.clone())))
            .collect();
        if relevant.is_empty() {
            return f.clone();
        }
        replace(f, &Replacement { metas: &relevant, consts: &BTreeMap::new() })
    }

    /// Extends `self` with every binding of `other` (applied after `self`).
    pub fn compose(&self, other: &Subst) -> Option<Subst> {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            match out.get(k).cloned() {
                Some(existing) => {
                    if out.apply_term(&existing) != out.apply_term(v) {
                        return None;
                    }
                }
                None => {
                    if !out.bind(k, v.clone()) {
                        return None;
                    }
                }
            }
        }
        Some(out)
    }

    pub fn restrict(&self, keep: &BTreeSet<String>) -> Subst {
        Subst { map: self.map.iter().filter(|(k, _)| keep.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{k} := {v}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(String, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        let mut s = Subst::new();
        for (k, v) in iter {
            s.bind(&k, v);
        }
        s
    }
}

fn replace_metas_term(t: &Term, map: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Meta(m) => match map.get(m) {
            Some(r) => r.clone(),
            None => t.clone(),
        },
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::Pair(a, b) => Term::pair(replace_metas_term(a, map), replace_metas_term(b, map)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| replace_metas_term(a, map)).collect()),
    }
}

struct Replacement<'a> {
    metas: &'a BTreeMap<String, Term>,
    consts: &'a BTreeMap<String, Term>,
}

impl Replacement<'_> {
    fn inserted_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        for t in self.metas.values().chain(self.consts.values()) {
            t.collect_names(&mut names);
        }
        names
    }
}

fn replace_term(t: &Term, r: &Replacement<'_>, vars: &BTreeMap<String, String>) -> Term {
    match t {
        Term::Meta(m) => r.metas.get(m).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(c) => r.consts.get(c).cloned().unwrap_or_else(|| t.clone()),
        Term::Var(v) => match vars.get(v) {
            Some(n) => Term::Var(n.clone()),
            None => t.clone(),
        },
        Term::Pair(a, b) => Term::pair(replace_term(a, r, vars), replace_term(b, r, vars)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| replace_term(a, r, vars)).collect()),
    }
}

fn replace(f: &Formula, r: &Replacement<'_>) -> Formula {
    let inserted = r.inserted_names();
    go(f, r, &inserted, &mut BTreeMap::new())
}

fn go(f: &Formula, r: &Replacement<'_>, inserted: &BTreeSet<String>, vars: &mut BTreeMap<String, String>) -> Formula {
    match f {
        Formula::Atom(p, a, b) => Formula::Atom(*p, replace_term(a, r, vars), replace_term(b, r, vars)),
        Formula::Not(g) => Formula::not(go(g, r, inserted, vars)),
        Formula::And(a, b) => Formula::and(go(a, r, inserted, vars), go(b, r, inserted, vars)),
        Formula::Or(a, b) => Formula::or(go(a, r, inserted, vars), go(b, r, inserted, vars)),
        Formula::Implies(a, b) => Formula::implies(go(a, r, inserted, vars), go(b, r, inserted, vars)),
        Formula::Iff(a, b) => Formula::iff(go(a, r, inserted, vars), go(b, r, inserted, vars)),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let universal = matches!(f, Formula::Forall(..));
            let new_name = if inserted.contains(x) {
                let mut avoid = body.names();
                avoid.extend(inserted.iter().cloned());
                avoid.extend(vars.values().cloned());
                fresh_prime(x, &avoid)
            } else {
                x.clone()
            };
            let saved = vars.insert(x.clone(), new_name.clone());
            let body = go(body, r, inserted, vars);
            match saved {
                Some(s) => vars.insert(x.clone(), s),
                None => vars.remove(x),
            };
            if universal {
                Formula::forall(&new_name, body)
            } else {
                Formula::exists(&new_name, body)
            }
        }
    }
}

fn fresh_prime(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

/// Capture-avoiding substitution of meta-variables.
pub fn substitute(f: &Formula, s: &Subst) -> Formula {
    s.apply(f)
}

/// Replaces free constants by terms, renaming binders that would capture.
pub fn replace_consts(f: &Formula, map: &BTreeMap<String, Term>) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    replace(f, &Replacement { metas: &BTreeMap::new(), consts: map })
}

pub fn replace_consts_term(t: &Term, map: &BTreeMap<String, Term>) -> Term {
    replace_term(t, &Replacement { metas: &BTreeMap::new(), consts: map }, &BTreeMap::new())
}

/// Replaces the free occurrences of bound-variable `var` in `body` by `t`
/// (instantiating a quantifier), capture-avoiding.
pub fn instantiate(body: &Formula, var: &str, t: &Term) -> Formula {
    fn term_inst(x: &Term, var: &str, t: &Term) -> Term {
        match x {
            Term::Var(v) if v == var => t.clone(),
            Term::Pair(a, b) => Term::pair(term_inst(a, var, t), term_inst(b, var, t)),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| term_inst(a, var, t)).collect()),
            _ => x.clone(),
        }
    }
    fn walk(f: &Formula, var: &str, t: &Term, names: &BTreeSet<String>) -> Formula {
        match f {
            Formula::Atom(p, a, b) => Formula::Atom(*p, term_inst(a, var, t), term_inst(b, var, t)),
            Formula::Not(g) => Formula::not(walk(g, var, t, names)),
            Formula::And(a, b) => Formula::and(walk(a, var, t, names), walk(b, var, t, names)),
            Formula::Or(a, b) => Formula::or(walk(a, var, t, names), walk(b, var, t, names)),
            Formula::Implies(a, b) => Formula::implies(walk(a, var, t, names), walk(b, var, t, names)),
            Formula::Iff(a, b) => Formula::iff(walk(a, var, t, names), walk(b, var, t, names)),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let universal = matches!(f, Formula::Forall(..));
                if x == var {
                    return f.clone();
                }
                let (x2, body2) = if names.contains(x) {
                    let mut avoid = body.names();
                    avoid.extend(names.iter().cloned());
                    let x2 = fresh_prime(x, &avoid);
                    (x2.clone(), instantiate(body, x, &Term::Var(x2)))
                } else {
                    (x.clone(), (**body).clone())
                };
                let inner = walk(&body2, var, t, names);
                if universal {
                    Formula::forall(&x2, inner)
                } else {
                    Formula::exists(&x2, inner)
                }
            }
        }
    }
    let mut names = BTreeSet::new();
    t.collect_names(&mut names);
    walk(body, var, t, &names)
}

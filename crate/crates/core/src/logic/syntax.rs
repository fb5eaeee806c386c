use std::collections::BTreeSet;

/// A first-order term.
///
/// `Var` is only used for occurrences bound by a quantifier. Free identifiers
/// (relation names, eigenvariables, witnesses) are `Const`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    Meta(String),
    Pair(Box<Term>, Box<Term>),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn cnst(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn meta(name: &str) -> Term {
        Term::Meta(name.to_string())
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    pub fn inv(t: Term) -> Term {
        Term::app("inv", vec![t])
    }

    pub fn comp(a: Term, b: Term) -> Term {
        Term::app("comp", vec![a, b])
    }

    pub fn union(a: Term, b: Term) -> Term {
        Term::app("union", vec![a, b])
    }

    pub fn inter(a: Term, b: Term) -> Term {
        Term::app("inter", vec![a, b])
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Meta(_) => false,
            Term::Var(_) | Term::Const(_) => true,
            Term::Pair(a, b) => a.is_ground() && b.is_ground(),
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn contains_meta(&self, name: &str) -> bool {
        match self {
            Term::Meta(m) => m == name,
            Term::Var(_) | Term::Const(_) => false,
            Term::Pair(a, b) => a.contains_meta(name) || b.contains_meta(name),
            Term::App(_, args) => args.iter().any(|t| t.contains_meta(name)),
        }
    }

    pub(crate) fn collect_metas(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Meta(m) => {
                out.insert(m.clone());
            }
            Term::Var(_) | Term::Const(_) => {}
            Term::Pair(a, b) => {
                a.collect_metas(out);
                b.collect_metas(out);
            }
            Term::App(_, args) => args.iter().for_each(|t| t.collect_metas(out)),
        }
    }

    /// Names of variables and constants occurring in the term.
    pub(crate) fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(n) | Term::Const(n) => {
                out.insert(n.clone());
            }
            Term::Meta(_) => {}
            Term::Pair(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Term::App(_, args) => args.iter().for_each(|t| t.collect_names(out)),
        }
    }

    pub(crate) fn collect_consts(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(n) => {
                out.insert(n.clone());
            }
            Term::Var(_) | Term::Meta(_) => {}
            Term::Pair(a, b) => {
                a.collect_consts(out);
                b.collect_consts(out);
            }
            Term::App(_, args) => args.iter().for_each(|t| t.collect_consts(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Meta(_) => 1,
            Term::Pair(a, b) => 1 + a.size() + b.size(),
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

/// The binary predicate symbols of the set-theoretic vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    In,
    Eq,
    Subset,
    Supset,
}

impl Pred {
    pub fn ascii(self) -> &'static str {
        match self {
            Pred::In => "in",
            Pred::Eq => "=",
            Pred::Subset => "subset",
            Pred::Supset => "supset",
        }
    }

    pub fn unicode(self) -> &'static str {
        match self {
            Pred::In => "∈",
            Pred::Eq => "=",
            Pred::Subset => "⊂",
            Pred::Supset => "⊃",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Pred, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(p: Pred, a: Term, b: Term) -> Formula {
        Formula::Atom(p, a, b)
    }

    pub fn member(a: Term, b: Term) -> Formula {
        Formula::Atom(Pred::In, a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, body: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(body))
    }

    pub fn exists(x: &str, body: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(body))
    }

    /// Builds a right-nested conjunction; `None` for an empty list.
    pub fn conjoin(mut parts: Vec<Formula>) -> Option<Formula> {
        let last = parts.pop()?;
        Some(parts.into_iter().rev().fold(last, |acc, f| Formula::and(f, acc)))
    }

    /// Flattens nested conjunctions into a list.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn metas(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_metas(&mut out));
        out
    }

    pub fn has_metas(&self) -> bool {
        let mut found = false;
        self.visit_terms(&mut |t| found |= !t.is_ground());
        found
    }

    pub fn consts(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_consts(&mut out));
        out
    }

    /// Every identifier occurring in the formula, bound or free, including binders.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_all_names(&mut out);
        out
    }

    fn collect_all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(_, a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Formula::Not(f) => f.collect_all_names(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_all_names(out);
                b.collect_all_names(out);
            }
            Formula::Forall(x, f) | Formula::Exists(x, f) => {
                out.insert(x.clone());
                f.collect_all_names(out);
            }
        }
    }

    /// Free variables (bound-variable syntax occurring outside its binder).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free_vars(&mut bound, &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        fn term(t: &Term, bound: &[String], out: &mut BTreeSet<String>) {
            match t {
                Term::Var(v) if !bound.contains(v) => {
                    out.insert(v.clone());
                }
                Term::Pair(a, b) => {
                    term(a, bound, out);
                    term(b, bound, out);
                }
                Term::App(_, args) => args.iter().for_each(|a| term(a, bound, out)),
                _ => {}
            }
        }
        match self {
            Formula::Atom(_, a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Formula::Not(f) => f.collect_free_vars(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free_vars(bound, out);
                b.collect_free_vars(bound, out);
            }
            Formula::Forall(x, f) | Formula::Exists(x, f) => {
                bound.push(x.clone());
                f.collect_free_vars(bound, out);
                bound.pop();
            }
        }
    }

    pub fn visit_terms(&self, visit: &mut impl FnMut(&Term)) {
        match self {
            Formula::Atom(_, a, b) => {
                visit(a);
                visit(b);
            }
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => f.visit_terms(visit),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_terms(visit);
                b.visit_terms(visit);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_, a, b) => 1 + a.size() + b.size(),
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Strips the outermost block of universal quantifiers.
    pub fn strip_forall(&self) -> (Vec<String>, &Formula) {
        let mut vars = Vec::new();
        let mut cur = self;
        while let Formula::Forall(x, body) = cur {
            vars.push(x.clone());
            cur = body;
        }
        (vars, cur)
    }
}

use std::fmt;

use super::syntax::{Formula, Term};

/// Precedence levels, loosest first.
const PREC_QUANT: u8 = 0;
const PREC_IFF: u8 = 1;
const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_NOT: u8 = 5;
const PREC_ATOM: u8 = 6;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Style {
    Ascii,
    Math,
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => PREC_QUANT,
        Formula::Iff(..) => PREC_IFF,
        Formula::Implies(..) => PREC_IMP,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        Formula::Not(..) => PREC_NOT,
        Formula::Atom(..) => PREC_ATOM,
    }
}

fn term(t: &Term, style: Style, out: &mut String) {
    match t {
        Term::Var(n) | Term::Const(n) => out.push_str(n),
        Term::Meta(n) => {
            out.push('?');
            out.push_str(n);
        }
        Term::Pair(a, b) => {
            out.push('(');
            term(a, style, out);
            out.push(',');
            term(b, style, out);
            out.push(')');
        }
        Term::App(f, args) if style == Style::Math => math_app(f, args, out),
        Term::App(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                term(a, style, out);
            }
            out.push(')');
        }
    }
}

/// Binding strength of the mathematical infix notation for relation terms.
fn math_level(t: &Term) -> u8 {
    match t {
        Term::App(f, args) => match (f.as_str(), args.len()) {
            ("union", 2) => 1,
            ("inter", 2) => 2,
            ("comp", 2) => 3,
            ("inv", 1) => 4,
            _ => 5,
        },
        _ => 5,
    }
}

fn math_operand(t: &Term, min: u8, out: &mut String) {
    if math_level(t) < min {
        out.push('(');
        term(t, Style::Math, out);
        out.push(')');
    } else {
        term(t, Style::Math, out);
    }
}

fn math_app(f: &str, args: &[Term], out: &mut String) {
    let level = math_level(&Term::App(f.to_string(), args.to_vec()));
    match (f, args) {
        ("inv", [a]) => {
            math_operand(a, 5, out);
            out.push_str("⁻¹");
        }
        (_, [a, b]) if level < 5 => {
            let sym = match f {
                "union" => " ∪ ",
                "inter" => " ∩ ",
                _ => "∘",
            };
            math_operand(a, level, out);
            out.push_str(sym);
            math_operand(b, level + 1, out);
        }
        _ => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                term(a, Style::Math, out);
            }
            out.push(')');
        }
    }
}

fn child(f: &Formula, min: u8, style: Style, out: &mut String) {
    // quantifiers extend maximally to the right, so they are always bracketed as operands
    if prec(f) < min || prec(f) == PREC_QUANT {
        out.push('(');
        formula(f, style, out);
        out.push(')');
    } else {
        formula(f, style, out);
    }
}

fn formula(f: &Formula, style: Style, out: &mut String) {
    let ascii = style == Style::Ascii;
    match f {
        Formula::Atom(p, a, b) => {
            term(a, style, out);
            out.push(' ');
            out.push_str(if ascii { p.ascii() } else { p.unicode() });
            out.push(' ');
            term(b, style, out);
        }
        Formula::Not(g) => {
            out.push_str(if ascii { "not " } else { "¬" });
            child(g, PREC_NOT, style, out);
        }
        Formula::And(a, b) => binary(a, b, PREC_AND, if ascii { " /\\ " } else { " ∧ " }, true, style, out),
        Formula::Or(a, b) => binary(a, b, PREC_OR, if ascii { " \\/ " } else { " ∨ " }, true, style, out),
        Formula::Implies(a, b) => binary(a, b, PREC_IMP, if ascii { " -> " } else { " ⇒ " }, false, style, out),
        Formula::Iff(a, b) => binary(a, b, PREC_IFF, if ascii { " <-> " } else { " ⇔ " }, true, style, out),
        Formula::Forall(..) | Formula::Exists(..) => {
            let universal = matches!(f, Formula::Forall(..));
            let mut vars = Vec::new();
            let mut cur = f;
            loop {
                match cur {
                    Formula::Forall(x, body) if universal => {
                        vars.push(x.as_str());
                        cur = body;
                    }
                    Formula::Exists(x, body) if !universal => {
                        vars.push(x.as_str());
                        cur = body;
                    }
                    _ => break,
                }
            }
            match (style, universal) {
                (Style::Ascii, true) => out.push_str("forall "),
                (Style::Ascii, false) => out.push_str("exists "),
                (Style::Math, true) => out.push('∀'),
                (Style::Math, false) => out.push('∃'),
            }
            out.push_str(&vars.join(" "));
            out.push_str(". ");
            formula(cur, style, out);
        }
    }
}

fn binary(a: &Formula, b: &Formula, p: u8, op: &str, left_assoc: bool, style: Style, out: &mut String) {
    let (lmin, rmin) = if left_assoc { (p, p + 1) } else { (p + 1, p) };
    child(a, lmin, style, out);
    out.push_str(op);
    child(b, rmin, style, out);
}

/// Renders in the ASCII concrete syntax accepted by the parser.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    formula(f, Style::Ascii, &mut out);
    out
}

pub fn render_term(t: &Term) -> String {
    let mut out = String::new();
    term(t, Style::Ascii, &mut out);
    out
}

/// Renders with mathematical symbols (∈, ⊂, ∘, ⁻¹, …) for student-facing text.
pub fn render_math(f: &Formula) -> String {
    let mut out = String::new();
    formula(f, Style::Math, &mut out);
    out
}

pub fn render_term_math(t: &Term) -> String {
    let mut out = String::new();
    term(t, Style::Math, &mut out);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_term(self))
    }
}

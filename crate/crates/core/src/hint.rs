//! Hint ladders extracted from hierarchical proof plans.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::logic::{render_math, Formula, Term};
use crate::rules::{Direction, RuleApplication};
use crate::strategy::{Edge, EdgeLabel, HierarchicalProofPlan, Level};
use crate::theory::{HintStyle, Theory};

pub const CATEGORY_NAMES: [&str; 8] = [
    "strategic",
    "variables",
    "concept-question",
    "backward-premises",
    "subgoal-pointer",
    "forward-conclusion",
    "full-application",
    "application-with-assertion",
];

pub const FALLBACK_TEXT: &str = "What assertion can be applied backward to the goal?";
pub const NO_PLAN_TEXT: &str = "Keep going: look at the goal and the assumptions you have so far.";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applicability {
    /// A strategy edge; `None` matches any strategy.
    Strategy(Option<String>),
    /// An inference edge; `None` matches any direction.
    Inference(Option<Direction>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HintTemplate {
    pub category: u8,
    pub applies_to: Applicability,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hint {
    pub category: Option<u8>,
    pub text: String,
    pub edge: Option<usize>,
    pub level: usize,
    pub strategic: bool,
}

impl Hint {
    pub fn category_name(&self) -> &'static str {
        self.category.map_or("none", |c| CATEGORY_NAMES[usize::from(c) - 1])
    }

    fn fallback(text: &str, strategic: bool) -> Self {
        Hint { category: None, text: text.to_string(), edge: None, level: 0, strategic }
    }
}

impl fmt::Display for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TemplateSet {
    pub templates: Vec<HintTemplate>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

const SLOTS: [&str; 7] = ["assertion", "goal", "premises", "conclusion", "variables", "strategy", "statement"];

pub fn parse_templates(text: &str) -> Result<TemplateSet, TemplateError> {
    let mut templates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let err = |m: &str| TemplateError::Syntax { line, message: m.to_string() };
        let (head, body) = l.split_once(':').ok_or_else(|| err("missing ':'"))?;
        let body = body.trim();
        let text = body
            .strip_prefix('"')
            .and_then(|b| b.strip_suffix('"'))
            .ok_or_else(|| err("template text must be quoted"))?;
        let words: Vec<&str> = head.split_whitespace().collect();
        let ["template", cat, "for", target, rest @ ..] = words.as_slice() else {
            return Err(err("expected 'template <category> for <target>'"));
        };
        let category: u8 = cat.parse().ok().filter(|c| (1..=8).contains(c)).ok_or_else(|| err("category must be 1 to 8"))?;
        let direction = match rest {
            [] => None,
            ["backward"] => Some(Direction::Backward),
            ["forward"] => Some(Direction::Forward),
            ["close"] => Some(Direction::Close),
            _ => return Err(err("expected 'backward', 'forward' or 'close'")),
        };
        let applies_to = match *target {
            "inference" => Applicability::Inference(direction),
            _ if direction.is_some() => return Err(err("directions apply to inference templates only")),
            "strategy" => Applicability::Strategy(None),
            name => Applicability::Strategy(Some(name.to_string())),
        };
        for slot in slots_of(text) {
            if !SLOTS.contains(&slot) {
                return Err(err(&format!("unknown slot {{{slot}}}")));
            }
            if matches!(applies_to, Applicability::Strategy(_)) && !matches!(slot, "strategy" | "goal") {
                return Err(err(&format!("slot {{{slot}}} cannot be filled on a strategy edge")));
            }
        }
        templates.push(HintTemplate { category, applies_to, text: text.to_string() });
    }
    Ok(TemplateSet { templates })
}

pub fn load_templates(path: impl AsRef<Path>) -> Result<TemplateSet, TemplateError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| TemplateError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_templates(&text)
}

fn slots_of(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else { break };
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    out
}

fn join_and(items: &[String]) -> String {
    items.join(" and ")
}

fn element_consts(fs: &[&Formula]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in fs {
        f.visit_terms(&mut |t| {
            fn walk(t: &Term, in_pair: bool, seen: &mut BTreeSet<String>, out: &mut Vec<String>) {
                match t {
                    Term::Const(c) if in_pair && seen.insert(c.clone()) => out.push(c.clone()),
                    Term::Pair(a, b) => {
                        walk(a, true, seen, out);
                        walk(b, true, seen, out);
                    }
                    Term::App(_, args) => args.iter().for_each(|a| walk(a, false, seen, out)),
                    _ => {}
                }
            }
            walk(t, false, &mut seen, &mut out);
        });
    }
    out
}

struct Context<'a> {
    plan: &'a HierarchicalProofPlan,
    theory: &'a Theory,
}

impl Context<'_> {
    fn slot(&self, edge: &Edge, slot: &str) -> Option<String> {
        let source = &self.plan.node(edge.source).sequent;
        if slot == "goal" {
            return Some(render_math(&source.goal));
        }
        let app = match &edge.label {
            EdgeLabel::Strategy(name) => return (slot == "strategy").then(|| name.clone()),
            EdgeLabel::Inference(app) => app,
        };
        match slot {
            "assertion" => (!app.is_structural()).then(|| self.theory.display_name(&app.concept).to_string()),
            "statement" => self.theory.assertion(&app.concept).map(|a| render_math(&a.formula)),
            "premises" => {
                let fs = self.premises(app, edge);
                (!fs.is_empty()).then(|| join_and(&fs.iter().map(|f| render_math(f)).collect::<Vec<_>>()))
            }
            "conclusion" => match app.direction {
                Direction::Forward => Some(render_math(&app.conclusion)),
                Direction::Backward if !edge.targets.is_empty() => {
                    let goals: Vec<String> = edge
                        .targets
                        .iter()
                        .map(|target| {
                            let t = &self.plan.node(*target).sequent;
                            let new: Vec<String> = t
                                .hyps
                                .iter()
                                .filter(|h| !source.has_hyp(&h.formula))
                                .map(|h| render_math(&h.formula))
                                .collect();
                            let goal = render_math(&t.goal);
                            if new.is_empty() { goal } else { format!("{} ⇒ {goal}", join_and(&new)) }
                        })
                        .collect();
                    Some(join_and(&goals))
                }
                Direction::Backward => None,
                Direction::Close => None,
            },
            "variables" => {
                let fs = match app.direction {
                    Direction::Backward => vec![&source.goal],
                    _ => self.premises(app, edge),
                };
                let vs = element_consts(&fs);
                (!vs.is_empty()).then(|| join_and(&vs))
            }
            "strategy" => edge.parent.map(|p| self.plan.edge(p).label.name().to_string()),
            _ => None,
        }
    }

    fn premises<'b>(&'b self, app: &'b RuleApplication, edge: &Edge) -> Vec<&'b Formula> {
        if !app.premises.is_empty() {
            return app.premises.iter().collect();
        }
        let source = &self.plan.node(edge.source).sequent;
        app.consumed.iter().filter_map(|l| source.hyp(l).map(|h| &h.formula)).collect()
    }

    fn fill(&self, t: &HintTemplate, edge: &Edge) -> Option<String> {
        let applicable = match (&t.applies_to, &edge.label) {
            (Applicability::Strategy(None), EdgeLabel::Strategy(_)) => true,
            (Applicability::Strategy(Some(n)), EdgeLabel::Strategy(s)) => n == s,
            (Applicability::Inference(d), EdgeLabel::Inference(app)) => d.is_none_or(|d| d == app.direction),
            _ => false,
        };
        if !applicable {
            return None;
        }
        let mut text = t.text.clone();
        for slot in slots_of(&t.text) {
            let value = self.slot(edge, slot)?;
            text = text.replace(&format!("{{{slot}}}"), &value);
        }
        Some(text)
    }
}

fn specificity(t: &HintTemplate) -> u8 {
    match &t.applies_to {
        Applicability::Strategy(Some(_)) | Applicability::Inference(Some(_)) => 0,
        _ => 1,
    }
}

/// Fills the first applicable template of `category` whose slots can all be filled.
pub fn instantiate_template(
    templates: &TemplateSet,
    category: u8,
    plan: &HierarchicalProofPlan,
    edge: usize,
    theory: &Theory,
) -> Option<String> {
    let ctx = Context { plan, theory };
    let e = plan.edge(edge);
    let mut candidates: Vec<&HintTemplate> = templates.templates.iter().filter(|t| t.category == category).collect();
    candidates.sort_by_key(|t| specificity(t));
    candidates.into_iter().find_map(|t| ctx.fill(t, e))
}

fn inference_categories(style: HintStyle, direction: Direction) -> &'static [u8] {
    match (style, direction) {
        (_, Direction::Close) => &[7, 8],
        (HintStyle::Didactic, Direction::Backward) => &[3, 5, 7, 8],
        (HintStyle::Socratic, Direction::Backward) => &[3, 4, 7, 8],
        (HintStyle::Didactic, Direction::Forward) => &[3, 6, 7, 8],
        (HintStyle::Socratic, Direction::Forward) => &[2, 6, 7, 8],
    }
}

/// The first inference of the plan in execution order.
fn first_inference(plan: &HierarchicalProofPlan) -> Option<usize> {
    let flat = plan.flatten_at_level(&Level::Full).ok()?;
    flat.edges.iter().map(|f| f.edge).find(|&e| !plan.edge(e).is_strategy())
}

/// Ladder positions as (edge, category) pairs, most abstract first.
pub fn ladder(plan: &HierarchicalProofPlan, style: HintStyle) -> Vec<(usize, u8)> {
    let Some(inf) = first_inference(plan) else { return Vec::new() };
    let mut out = Vec::new();
    if let Some(p) = plan.edge(inf).parent {
        out.push((p, 1));
    }
    let EdgeLabel::Inference(app) = &plan.edge(inf).label else { unreachable!() };
    out.extend(inference_categories(style, app.direction).iter().map(|&c| (inf, c)));
    out
}

/// The hint at `position` of the ladder; positions past the end repeat the last hint.
pub fn generate_hint(
    plan: Option<&HierarchicalProofPlan>,
    position: usize,
    templates: &TemplateSet,
    style: HintStyle,
    theory: &Theory,
) -> Hint {
    let Some(plan) = plan else { return Hint::fallback(NO_PLAN_TEXT, false) };
    let mut filled: Vec<Hint> = Vec::new();
    for (edge, category) in ladder(plan, style) {
        let text = instantiate_template(templates, category, plan, edge, theory)
            .or_else(|| (category == 1).then(|| FALLBACK_TEXT.to_string()));
        if let Some(text) = text {
            filled.push(Hint {
                category: Some(category),
                text,
                edge: Some(edge),
                level: plan.edge(edge).depth,
                strategic: category == 1,
            });
        }
    }
    match filled.len() {
        0 => Hint::fallback(FALLBACK_TEXT, true),
        n => filled.swap_remove(position.min(n - 1)),
    }
}

//! Batch commands behind the `tutor` binary.

use anyhow::{anyhow, bail, Result};
use serde_json::json;

use tutor_core::eval::{evaluate_corpus, parse_corpus, EvalReport};
use tutor_core::reconstruction::initial_states;
use tutor_core::script::parse_script;
use tutor_core::session::{compute_plan, Library, Session, StepOutcome};
use tutor_core::strategy::Level;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

pub struct Report {
    pub output: String,
    pub success: bool,
}

/// Feeds each step of a script to a fresh session.
pub fn check(library: &Library, exercise: &str, script: &str, format: Format) -> Result<Report> {
    let ex = library.exercise(exercise).ok_or_else(|| anyhow!("unknown exercise '{exercise}'"))?;
    let parsed = parse_script(script).map_err(|e| anyhow!("script: {e}"))?;
    let mut session = Session::new("check", ex, library);
    let mut texts: Vec<&str> = parsed.spans.iter().map(|s| script[s.start..s.end].trim()).collect();
    if parsed.qed {
        texts.push("qed");
    }
    let mut results: Vec<(String, Option<StepOutcome>)> = Vec::new();
    for text in texts {
        if session.proof_complete {
            results.push((text.to_string(), None));
            continue;
        }
        let out = session.submit_step(text)?;
        results.push((text.to_string(), Some(out)));
    }
    let success = results.iter().all(|(_, o)| o.as_ref().is_none_or(|o| o.feedback.soundness.as_str() == "correct"));
    let output = match format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "exercise": exercise,
            "steps": results.iter().map(|(t, o)| json!({ "text": t, "outcome": o })).collect::<Vec<_>>(),
            "proof_complete": session.proof_complete,
            "all_correct": success,
        }))?,
        Format::Text => {
            let mut out = String::new();
            for (i, (text, o)) in results.iter().enumerate() {
                match o {
                    None => out.push_str(&format!("{:>3}. {text}\n     skipped (proof already complete)\n", i + 1)),
                    Some(o) => {
                        out.push_str(&format!("{:>3}. {text}\n     {}\n", i + 1, o.feedback));
                        for m in &o.messages {
                            out.push_str(&format!("     - {m}\n"));
                        }
                    }
                }
            }
            out.push_str(if session.proof_complete { "proof complete\n" } else { "proof open\n" });
            out
        }
    };
    Ok(Report { output, success })
}

pub fn eval(library: &Library, corpus: &str, depth: Option<usize>, format: Format) -> Result<(EvalReport, String)> {
    let parsed = parse_corpus(corpus);
    let report = evaluate_corpus(&parsed, library, depth);
    let output = match format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Text => {
            let mut out = report.to_string();
            for s in &report.steps {
                out.push_str(&format!("  line {:>3} [{}] {}: {}\n", s.line, s.gold.as_str(), s.verdict, s.text));
            }
            out
        }
    };
    Ok((report, output))
}

/// The exercise's strategy plan from its initial task, flattened at `level`.
pub fn prove(library: &Library, exercise: &str, strategy: Option<&str>, level: Option<usize>, format: Format) -> Result<Report> {
    let ex = library.exercise(exercise).ok_or_else(|| anyhow!("unknown exercise '{exercise}'"))?;
    let theory = library.theory_for(ex);
    let name = strategy.unwrap_or(&ex.strategy);
    if theory.strategies.get(name).is_none() {
        bail!("unknown strategy '{name}'");
    }
    let state = &initial_states(ex)[0];
    let plan = compute_plan(state, name, &theory);
    let Some(plan) = plan else {
        return Ok(Report { output: format!("strategy {name} found no plan\n"), success: false });
    };
    let level = level.map_or(Level::Full, Level::Depth);
    let flat = plan.flatten_at_level(&level).map_err(|e| anyhow!(e))?;
    let output = match format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "strategy": name,
            "closed": plan.is_closed(),
            "tasks": plan.nodes.iter().map(|n| n.sequent.to_string()).collect::<Vec<_>>(),
            "edges": flat.edges.iter().map(|e| json!({
                "label": e.label,
                "source": plan.node(e.source).sequent.label,
                "targets": e.targets.iter().map(|t| plan.node(*t).sequent.label.clone()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }))?,
        Format::Text => {
            let mut out = format!("strategy {name} ({})\n", if plan.is_closed() { "closed" } else { "open" });
            out.push_str(&plan.render());
            out.push_str("flattened:\n");
            out.push_str(&flat.render(&plan));
            out.push('\n');
            out
        }
    };
    Ok(Report { output, success: plan.is_closed() })
}

//! `pdtl prove`: replay a script and report the open goals.

use std::collections::BTreeSet;

use pdtl_core::kernel::{check_script, KernelError, RuleRegistry, Sequent};
use serde_json::json;

use crate::corpus::{load_model, load_script};
use crate::output::{Out, Tone};
use crate::{Exit, Failure};

pub fn run(out: &Out, model: &str, script: &str) -> Result<Exit, Failure> {
    let model = load_model(model)?;
    let script = load_script(script)?;
    let claim = Sequent::goal(model.problem.clone());
    let report = check_script(&RuleRegistry::standard(), &script, &claim).map_err(|e| match e {
        KernelError::ScriptSyntax { .. } => Failure::parse(e.to_string()),
        other => Failure { exit: Exit::Refuted, message: format!("replay failed: {other}") },
    })?;
    let rules: BTreeSet<&str> = report.proof.nodes().iter().filter_map(|n| n.step.as_ref().map(|s| s.rule.as_str())).collect();
    if out.json {
        let open: Vec<_> =
            report.open.iter().map(|g| json!({ "id": g.id, "sequent": g.sequent.to_string(), "note": g.note })).collect();
        out.json_value(&json!({
            "problem": model.problem.to_string(),
            "closed": report.closed(),
            "steps": report.steps,
            "rules": rules,
            "open": open,
            "proof": report.proof.to_json(),
        }));
    } else {
        println!("problem: {}", model.problem);
        println!("steps: {}", report.steps);
        println!("rules: {}", rules.into_iter().collect::<Vec<_>>().join(", "));
        if report.closed() {
            println!("{}", out.paint("proved: no open goals", Tone::Good));
        } else {
            println!("{}", out.paint(&format!("open goals: {}", report.open.len()), Tone::Bad));
            for g in &report.open {
                println!("  goal {}: {}", g.id, g.sequent);
                if let Some(note) = &g.note {
                    println!("    {note}");
                }
            }
        }
    }
    Ok(if report.closed() { Exit::Success } else { Exit::Refuted })
}

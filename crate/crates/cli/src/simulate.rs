//! `pdtl simulate`: enumerate bounded traces from one start state.

use std::collections::BTreeMap;

use pdtl_core::poly::fmt_rational;
use pdtl_core::sim::{
    eval_box_tae, eval_state_formula, trace_seed, BoxTaeReport, BoxVerdict, EnumConfig, FlowKind, State, TaeVerdict, Trace, Truth,
};
use pdtl_core::syntax::{free_vars, Cmp, Formula, Model, Program, TraceFormula, VarId};
use pdtl_core::Rational;
use serde_json::{json, Value};

use crate::config::SimArgs;
use crate::corpus::load_model;
use crate::output::{Out, Tone};
use crate::{Exit, Failure};

/// `P -> [α] tae: φ` or `[α] tae: φ`.
fn split_problem(f: &Formula) -> Option<(Option<&Formula>, &Program, &Formula)> {
    let (pre, body) = match f {
        Formula::Imp(p, b) => (Some(&**p), &**b),
        other => (None, other),
    };
    match body {
        Formula::BoxOp(prog, k) => match &**k {
            TraceFormula::Tae(phi) => Some((pre, prog, phi)),
            TraceFormula::State(_) => None,
        },
        _ => None,
    }
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(a, b) => {
            let mut v = conjuncts(a);
            v.extend(conjuncts(b));
            v
        }
        other => vec![other],
    }
}

/// Values fixed by equations `a*x + c = 0` among the top-level conjuncts.
fn pinned(pre: &Formula) -> BTreeMap<VarId, Rational> {
    let mut out = BTreeMap::new();
    for c in conjuncts(pre) {
        let Formula::Atom(a) = c else { continue };
        if a.cmp != Cmp::Eq {
            continue;
        }
        let vars = free_vars(c);
        let [x] = vars.iter().collect::<Vec<_>>()[..] else { continue };
        if let Some(p) = a.poly.to_upoly(x).filter(|p| p.degree() == 1) {
            let coeffs = p.coeffs();
            out.entry(x.clone()).or_insert_with(|| -&coeffs[0] / &coeffs[1]);
        }
    }
    out
}

/// Declared and free variables start at zero unless the precondition pins
/// them or `--init` overrides them. The precondition must hold there.
fn start_state(model: &Model, pre: Option<&Formula>, args: &SimArgs, cfg: &EnumConfig) -> Result<State, Failure> {
    let zero = Rational::from_integer(0.into());
    let mut values: BTreeMap<VarId, Rational> =
        model.vars.iter().cloned().chain(free_vars(&model.problem)).map(|x| (x, zero.clone())).collect();
    if let Some(p) = pre {
        values.extend(pinned(p));
    }
    values.extend(args.overrides()?);
    let w = State::exact(values);
    if let Some(p) = pre {
        match eval_state_formula(&w, p, cfg) {
            Truth::True => {}
            other => {
                return Err(Failure::usage(format!(
                    "the precondition {p} is {other} at the start state {w}; choose one with --init"
                )))
            }
        }
    }
    Ok(w)
}

fn flow_json(trace: &Trace) -> Vec<Value> {
    trace
        .flows
        .iter()
        .map(|f| {
            let kind = match &f.kind {
                _ if f.is_abort() => "abort",
                FlowKind::Discrete(_) => "discrete",
                FlowKind::Symbolic { .. } => "symbolic",
                FlowKind::Numeric { .. } => "numeric",
            };
            json!({ "kind": kind, "duration": fmt_rational(&f.duration), "start": f.first(), "end": f.last() })
        })
        .collect()
}

fn config_json(cfg: &EnumConfig) -> Value {
    json!({
        "unroll": cfg.unroll,
        "durations": cfg.durations.iter().map(fmt_rational).collect::<Vec<_>>(),
        "exhaustive_ode": cfg.exhaustive_ode,
        "mc_samples": cfg.mc_samples,
        "seed": cfg.seed,
        "step": cfg.step,
        "max_traces": cfg.max_traces,
        "zero_threshold": cfg.zero_threshold,
    })
}

fn verdict_name(v: &BoxVerdict) -> &'static str {
    match v {
        BoxVerdict::Holds => "holds",
        BoxVerdict::Fails => "fails",
        BoxVerdict::Unknown(_) => "unknown",
    }
}

fn report_json(problem: &Formula, cfg: &EnumConfig, w: &State, report: &BoxTaeReport) -> Value {
    let traces: Vec<Value> = report
        .records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            json!({
                "index": k,
                "seed": trace_seed(cfg.seed, k).to_string(),
                "terminates": r.trace.terminates(),
                "flows": flow_json(&r.trace),
                "verdict": r.verdict,
            })
        })
        .collect();
    let reason = match &report.verdict {
        BoxVerdict::Unknown(why) => Some(why.clone()),
        _ => None,
    };
    json!({
        "problem": problem.to_string(),
        "config": config_json(cfg),
        "start": w,
        "verdict": verdict_name(&report.verdict),
        "reason": reason,
        "bounded": report.bounded,
        "statistical": report.statistical,
        "traces": traces,
        "seeds": { "base": cfg.seed, "per_trace": (0..report.records.len()).map(|k| trace_seed(cfg.seed, k).to_string()).collect::<Vec<_>>() },
    })
}

fn describe(v: &TaeVerdict) -> String {
    match v {
        TaeVerdict::Holds { report } => format!("holds, violation measure {}", report.measure),
        TaeVerdict::FailedDiscrete { index, state } => {
            format!("fails at flow {index}: the instantaneous state {state} is outside the closure")
        }
        TaeVerdict::FailedContinuous { report } => {
            let ws: Vec<String> = report.witnesses.iter().map(|w| w.to_string()).collect();
            format!("fails, violation measure {} ({})", report.measure, ws.join("; "))
        }
        TaeVerdict::Unknown { reason } => format!("unknown: {reason}"),
    }
}

fn print_report(out: &Out, problem: &Formula, w: &State, report: &BoxTaeReport) {
    println!("problem: {problem}");
    println!("start: {w}");
    let mut labels = Vec::new();
    if report.bounded {
        labels.push("bounded");
    }
    if report.statistical {
        labels.push("statistical");
    }
    let labels = if labels.is_empty() { String::new() } else { format!(" [{}]", labels.join(", ")) };
    println!("traces: {}{labels}", report.records.len());
    for (k, r) in report.records.iter().enumerate() {
        if r.verdict.holds() && report.records.len() > 8 {
            continue;
        }
        println!("  trace {k}: {}", r.trace);
        println!("    {}", describe(&r.verdict));
    }
    let (text, tone) = match &report.verdict {
        BoxVerdict::Holds => ("verdict: holds".to_string(), Tone::Good),
        BoxVerdict::Fails => ("verdict: fails".to_string(), Tone::Bad),
        BoxVerdict::Unknown(why) => (format!("verdict: unknown ({why})"), Tone::Unsure),
    };
    println!("{}", out.paint(&text, tone));
}

fn exit_for(v: &Truth) -> Exit {
    match v {
        Truth::True => Exit::Success,
        Truth::False => Exit::Refuted,
        Truth::Unknown(_) => Exit::Unknown,
    }
}

pub fn run(out: &Out, model: &str, args: &SimArgs) -> Result<Exit, Failure> {
    let model = load_model(model)?;
    let cfg = args.config()?;
    let Some((pre, prog, phi)) = split_problem(&model.problem) else {
        let w = start_state(&model, None, args, &cfg)?;
        let truth = eval_state_formula(&w, &model.problem, &cfg);
        if out.json {
            out.json_value(
                &json!({ "problem": model.problem.to_string(), "config": config_json(&cfg), "start": w, "truth": truth }),
            );
        } else {
            println!("problem: {}\nstart: {w}\ntruth: {truth}", model.problem);
        }
        return Ok(exit_for(&truth));
    };
    let w = start_state(&model, pre, args, &cfg)?;
    let report = eval_box_tae(prog, &w, phi, &cfg);
    if out.json {
        out.json_value(&report_json(&model.problem, &cfg, &w, &report));
    } else {
        print_report(out, &model.problem, &w, &report);
    }
    Ok(exit_for(&report.verdict.truth()))
}

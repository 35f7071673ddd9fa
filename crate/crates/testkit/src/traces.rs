//! Composition and last-state properties of tae on enumerated exact traces.

use pdtl_core::poly::{closure, eval_qf, ratio};
use pdtl_core::sim::{compose, enumerate_traces, tae_eval, EnumConfig, State, TaeVerdict, Trace};
use pdtl_core::syntax::Formula;

use crate::{form, prog, Outcome};

/// Durations with a half step, so truncations and quadratic flows vary.
pub fn config() -> EnumConfig {
    EnumConfig { durations: vec![ratio(0, 1), ratio(1, 2), ratio(1, 1), ratio(5, 2)], ..EnumConfig::default() }
}

/// The trace of `program` from `w` selected by `pick` among those enumerated.
pub fn pick_trace(program: &str, w: &State, pick: usize, terminating: bool) -> Option<Trace> {
    let traces: Vec<Trace> =
        enumerate_traces(&prog(program), w, &config()).ok()?.into_iter().filter(|t| !terminating || t.terminates()).collect();
    if traces.is_empty() {
        return None;
    }
    Some(traces[pick % traces.len()].clone())
}

pub fn closure_holds_at(phi: &Formula, w: &State) -> bool {
    let cl = closure(phi);
    assert!(cl.quantifier_free, "linear closures are quantifier-free");
    let vals = w.exact_values().expect("exact state");
    eval_qf(&cl.formula, &|x| vals.get(x).cloned())
}

fn decided(v: &TaeVerdict, trace: &Trace) -> Result<bool, String> {
    match v {
        TaeVerdict::Unknown { reason } => Err(format!("exact trace {trace} left undecided: {reason}")),
        v => Ok(v.holds()),
    }
}

/// tae holds on a composition exactly when it holds on both parts.
pub fn check_composition(first: &str, second: &str, w: &State, phi: &str, i: usize, j: usize) -> Result<Outcome, String> {
    let Some(xi) = pick_trace(first, w, i, true) else { return Ok(Outcome::Skipped) };
    let Some(eta) = pick_trace(second, &xi.last(), j, false) else { return Ok(Outcome::Skipped) };
    let phi = form(phi);
    let both = compose(&xi, &eta).map_err(|e| e.to_string())?;
    if both.len() != xi.len() + eta.len() {
        return Err(format!("{xi} then {eta} composed to {both}"));
    }
    let cfg = config();
    let whole = decided(&tae_eval(&both, &phi, &cfg), &both)?;
    let parts = decided(&tae_eval(&xi, &phi, &cfg), &xi)? && decided(&tae_eval(&eta, &phi, &cfg), &eta)?;
    if whole != parts {
        return Err(format!("{xi} then {eta} with {phi}: whole {whole}, parts {parts}"));
    }
    Ok(Outcome::Checked)
}

/// A terminating trace on which tae holds ends inside the closure.
pub fn check_last_state(program: &str, w: &State, phi: &str, i: usize) -> Result<Outcome, String> {
    let Some(sigma) = pick_trace(program, w, i, true) else { return Ok(Outcome::Skipped) };
    let phi = form(phi);
    if decided(&tae_eval(&sigma, &phi, &config()), &sigma)? && !closure_holds_at(&phi, &sigma.last()) {
        return Err(format!("{sigma} ends outside the closure of {phi}"));
    }
    Ok(Outcome::Checked)
}

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::Zero;

use super::cells::{cells, AtomTable};
use super::eval::eval_state_formula;
use super::state::State;
use super::trace::{compose, Flow, Trace};
use super::{EnumConfig, SimError, Truth};
use crate::ode::{numeric_flow, solve_polynomial_avoiding, PolySolution, DEFAULT_DEPTH};
use crate::poly::{rat, rational_from_f64, rational_to_f64};
use crate::syntax::{OdeSystem, Program, VarId};
use crate::Rational;

/// All traces of `prog` from `w`, with loops unrolled at most `cfg.unroll`
/// times and ODE durations drawn from `cfg.durations`.
pub fn enumerate_traces(prog: &Program, w: &State, cfg: &EnumConfig) -> Result<Vec<Trace>, SimError> {
    let out = enumerate(prog, w, cfg)?;
    Ok(out)
}

fn enumerate(prog: &Program, w: &State, cfg: &EnumConfig) -> Result<Vec<Trace>, SimError> {
    let out = match prog {
        Program::Assign(x, e) => {
            let v = w.eval(e)?;
            vec![Trace::new(vec![Flow::discrete(w.clone()), Flow::discrete(w.with(x, v))])]
        }
        Program::Test(p) => match eval_state_formula(w, p, cfg) {
            Truth::True => vec![Trace::point(w.clone())],
            Truth::False => vec![Trace::failing(w.clone())],
            Truth::Unknown(why) => return Err(SimError::Undecided(why)),
        },
        Program::Ode(sys) => ode_traces(sys, w, cfg)?,
        Program::Choice(a, b) => {
            let mut v = enumerate(a, w, cfg)?;
            v.extend(enumerate(b, w, cfg)?);
            v
        }
        Program::Seq(a, b) => {
            let mut v = Vec::new();
            for xi in enumerate(a, w, cfg)? {
                if !xi.terminates() {
                    v.push(xi);
                    continue;
                }
                for eta in enumerate(b, &xi.last(), cfg)? {
                    v.push(compose(&xi, &eta)?);
                }
                check_budget(v.len(), cfg)?;
            }
            v
        }
        Program::Loop(a) => {
            // α^n = α; α^(n-1) and α^0 = ?true, so every terminating
            // iteration count ends in a zero-duration copy of its last state
            let mut v = vec![Trace::point(w.clone())];
            let mut frontier: Vec<Trace> = Vec::new();
            for n in 1..=cfg.unroll {
                let mut next = Vec::new();
                let extensions = if n == 1 {
                    enumerate(a, w, cfg)?
                } else {
                    let mut ext = Vec::new();
                    for p in &frontier {
                        for eta in enumerate(a, &p.last(), cfg)? {
                            ext.push(compose(p, &eta)?);
                        }
                        check_budget(ext.len() + v.len(), cfg)?;
                    }
                    ext
                };
                for t in extensions {
                    if t.terminates() {
                        v.push(compose(&t, &Trace::point(t.last()))?);
                        next.push(t);
                    } else {
                        v.push(t);
                    }
                }
                check_budget(v.len(), cfg)?;
                frontier = next;
            }
            v
        }
    };
    check_budget(out.len(), cfg)?;
    Ok(out)
}

fn check_budget(n: usize, cfg: &EnumConfig) -> Result<(), SimError> {
    if n > cfg.max_traces {
        return Err(SimError::TooManyTraces(cfg.max_traces));
    }
    Ok(())
}

/// Final states of the terminating traces, without duplicates.
pub fn reach_relation(prog: &Program, w: &State, cfg: &EnumConfig) -> Result<Vec<State>, SimError> {
    let mut out: Vec<State> = Vec::new();
    for t in enumerate(prog, w, cfg)? {
        if t.terminates() {
            let s = t.last();
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// One trace per sampled duration, each truncated to the longest prefix on
/// which the domain holds throughout.
fn ode_traces(sys: &OdeSystem, w: &State, cfg: &EnumConfig) -> Result<Vec<Trace>, SimError> {
    match eval_state_formula(w, &sys.domain, cfg) {
        Truth::True => {}
        Truth::False => return Ok(vec![Trace::failing(w.clone())]),
        Truth::Unknown(why) => return Err(SimError::Undecided(why)),
    }
    Ok(ode_flows(sys, w, cfg)?.into_iter().map(|f| Trace::new(vec![f])).collect())
}

/// Flows for every sampled duration. The domain must hold at `w`.
pub(crate) fn ode_flows(sys: &OdeSystem, w: &State, cfg: &EnumConfig) -> Result<Vec<Flow>, SimError> {
    for x in sys.vars() {
        if w.values().get(x).is_none() {
            return Err(SimError::Unvalued(x.clone()));
        }
    }
    let max = cfg.durations.iter().max().cloned().unwrap_or_else(Rational::zero);
    let mut seen: BTreeSet<Rational> = BTreeSet::new();
    let mut out = Vec::new();
    if let Some(sol) = exact_solution(sys, w) {
        let probe = Flow::symbolic(w.clone(), sol.clone(), Rational::zero());
        let limit = admissible_limit(sys, &probe, &max)?;
        for r in &cfg.durations {
            let d = r.clone().min(limit.clone());
            if seen.insert(d.clone()) {
                out.push(Flow::symbolic(w.clone(), sol.clone(), d));
            }
        }
        return Ok(out);
    }
    let evolving: Arc<Vec<VarId>> = Arc::new(sys.vars().cloned().collect());
    let samples = Arc::new(numeric_flow(sys, &w.f64_values(), rational_to_f64(&max), cfg.step)?);
    let mut limit = max.clone();
    let probe = Flow::numeric(w.clone(), samples.clone(), evolving.clone(), max.clone());
    for (k, t) in samples.times.iter().enumerate().skip(1) {
        let s = probe.at_f64(*t);
        match eval_state_formula(&s, &sys.domain, cfg) {
            Truth::True => {}
            Truth::False => {
                limit = rational_from_f64(samples.times[k - 1]).unwrap_or_else(Rational::zero);
                break;
            }
            Truth::Unknown(why) => return Err(SimError::Undecided(why)),
        }
    }
    for r in &cfg.durations {
        let d = r.clone().min(limit.clone());
        if seen.insert(d.clone()) {
            out.push(Flow::numeric(w.clone(), samples.clone(), evolving.clone(), d));
        }
    }
    Ok(out)
}

type SolutionCache = HashMap<(OdeSystem, BTreeSet<VarId>), Option<Arc<PolySolution>>>;

thread_local! {
    static SOLUTIONS: RefCell<SolutionCache> = RefCell::new(HashMap::new());
}

/// The polynomial solution, when one exists and the state is exact.
pub(crate) fn exact_solution(sys: &OdeSystem, w: &State) -> Option<Arc<PolySolution>> {
    if !w.is_exact() {
        return None;
    }
    let avoid: BTreeSet<VarId> = w.values().keys().cloned().chain(sys.domain.all_vars()).collect();
    let key = (sys.clone(), avoid);
    if let Some(hit) = SOLUTIONS.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let sol = solve_polynomial_avoiding(sys, &key.1, DEFAULT_DEPTH).ok().map(Arc::new);
    SOLUTIONS.with(|c| c.borrow_mut().insert(key, sol.clone()));
    sol
}

/// Largest duration up to `max` for which the domain holds on the whole flow.
/// When that supremum is irrational or not attained, a rational duration
/// strictly inside the admissible set is returned instead.
fn admissible_limit(sys: &OdeSystem, flow: &Flow, max: &Rational) -> Result<Rational, SimError> {
    if !sys.has_domain() || max.is_zero() {
        return Ok(max.clone());
    }
    if !sys.domain.is_quantifier_free() {
        return Err(SimError::Undecided(format!("quantified domain `{}`", sys.domain)));
    }
    let table = AtomTable::along(&sys.domain, flow)?;
    let cs = cells(&table.upolys, &Rational::zero(), max)?;
    let mut last_ok: Option<usize> = None;
    for (i, c) in cs.iter().enumerate() {
        if table.eval(&sys.domain, &c.signs) {
            last_ok = Some(i);
            continue;
        }
        let Some(j) = last_ok else {
            return Ok(Rational::zero());
        };
        let good = &cs[j];
        if good.point {
            // holds at the isolated point and fails right after it
            return Ok(good.from.exact().unwrap_or_else(|| good.from.lower()).clone());
        }
        // fails at the point closing the admissible interval
        return Ok((good.from.upper() + good.to.lower()) / rat(2));
    }
    Ok(max.clone())
}

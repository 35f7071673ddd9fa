use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cells::{cells, eval_signs, sign_near_zero, AtomTable};
use super::enumerate::{enumerate_traces, exact_solution, ode_flows};
use super::measure::{holds_qf, violation_measure, ViolationReport, ZeroTest};
use super::state::State;
use super::trace::{position_to_time, Flow, Trace};
use super::{EnumConfig, SimError, Truth};
use crate::poly::{check_validity, closure, ratio, relaxed_closure, ClosureResult, Poly, Verdict};
use crate::syntax::{free_vars, substitute, Formula, OdeSystem, Program, TraceFormula, VarId};
use crate::Rational;

/// Three-valued truth of a state formula at a state.
pub fn eval_state_formula(w: &State, f: &Formula, cfg: &EnumConfig) -> Truth {
    if w.is_abort() {
        return Truth::Unknown("formula evaluated at the failure state".into());
    }
    match f {
        Formula::Atom(_) => match holds_qf(f, w) {
            Ok(b) => Truth::from(b),
            Err(e) => Truth::Unknown(e.to_string()),
        },
        Formula::Not(g) => eval_state_formula(w, g, cfg).not(),
        Formula::And(a, b) => eval_state_formula(w, a, cfg).and(|| eval_state_formula(w, b, cfg)),
        Formula::Or(a, b) => eval_state_formula(w, a, cfg).or(|| eval_state_formula(w, b, cfg)),
        Formula::Imp(a, b) => eval_state_formula(w, a, cfg).not().or(|| eval_state_formula(w, b, cfg)),
        Formula::Equiv(a, b) => eval_state_formula(w, a, cfg).equiv(eval_state_formula(w, b, cfg)),
        Formula::Forall(..) | Formula::Exists(..) => eval_quantified(w, f),
        Formula::BoxOp(p, k) => match &**k {
            TraceFormula::State(g) => eval_box(p, w, g, cfg),
            TraceFormula::Tae(g) => eval_box_tae(p, w, g, cfg).verdict.truth(),
        },
        Formula::DiamondOp(p, k) => match &**k {
            TraceFormula::State(g) => eval_diamond(p, w, g, cfg),
            TraceFormula::Tae(g) => eval_diamond_tae(p, w, g, cfg),
        },
    }
}

fn eval_box(p: &Program, w: &State, post: &Formula, cfg: &EnumConfig) -> Truth {
    match p {
        Program::Assign(x, e) => match w.eval(e) {
            Ok(v) => eval_state_formula(&w.with(x, v), post, cfg),
            Err(e) => Truth::Unknown(e.to_string()),
        },
        Program::Test(q) => eval_state_formula(w, q, cfg).not().or(|| eval_state_formula(w, post, cfg)),
        Program::Choice(a, b) => eval_box(a, w, post, cfg).and(|| eval_box(b, w, post, cfg)),
        Program::Seq(a, b) => eval_box(a, w, &Formula::box_state((**b).clone(), post.clone()), cfg),
        Program::Loop(a) => eval_state_formula(w, &unrolled(a, post, cfg.unroll, true), cfg),
        Program::Ode(sys) => eval_ode(sys, w, post, cfg, true),
    }
}

fn eval_diamond(p: &Program, w: &State, post: &Formula, cfg: &EnumConfig) -> Truth {
    match p {
        Program::Assign(x, e) => match w.eval(e) {
            Ok(v) => eval_state_formula(&w.with(x, v), post, cfg),
            Err(e) => Truth::Unknown(e.to_string()),
        },
        Program::Test(q) => eval_state_formula(w, q, cfg).and(|| eval_state_formula(w, post, cfg)),
        Program::Choice(a, b) => eval_diamond(a, w, post, cfg).or(|| eval_diamond(b, w, post, cfg)),
        Program::Seq(a, b) => eval_diamond(a, w, &Formula::diamond((**b).clone(), TraceFormula::State(post.clone())), cfg),
        Program::Loop(a) => eval_state_formula(w, &unrolled(a, post, cfg.unroll, false), cfg),
        Program::Ode(sys) => eval_ode(sys, w, post, cfg, false),
    }
}

/// `ψ & [α](ψ & [α](...))` with `n` nested boxes, or the diamond dual.
fn unrolled(a: &Program, post: &Formula, n: usize, boxed: bool) -> Formula {
    let mut f = post.clone();
    for _ in 0..n {
        if boxed {
            f = Formula::and(post.clone(), Formula::box_state(a.clone(), f));
        } else {
            f = Formula::or(post.clone(), Formula::diamond(a.clone(), TraceFormula::State(f)));
        }
    }
    f
}

/// Box (`all`) or diamond over the states an ODE reaches. Exact over every
/// admissible duration when the flow is polynomial and the postcondition
/// reduces to a quantifier-free formula; otherwise over sampled durations.
fn eval_ode(sys: &OdeSystem, w: &State, post: &Formula, cfg: &EnumConfig, all: bool) -> Truth {
    match eval_state_formula(w, &sys.domain, cfg) {
        Truth::True => {}
        Truth::False => return Truth::from(all),
        u @ Truth::Unknown(_) => return u,
    }
    if cfg.exhaustive_ode {
        if let Some(t) = eval_ode_exact(sys, w, post, all) {
            return t;
        }
    }
    let flows = match ode_flows(sys, w, cfg) {
        Ok(f) => f,
        Err(e) => return Truth::Unknown(e.to_string()),
    };
    let mut acc = Truth::from(all);
    for f in flows {
        let v = eval_state_formula(&f.last(), post, cfg);
        acc = if all { acc.and(|| v) } else { acc.or(|| v) };
        if acc == Truth::from(!all) {
            break;
        }
    }
    acc
}

fn eval_ode_exact(sys: &OdeSystem, w: &State, post: &Formula, all: bool) -> Option<Truth> {
    let sol = exact_solution(sys, w)?;
    let post = reduce_fo(post)?;
    if !post.is_quantifier_free() || !sys.domain.is_quantifier_free() {
        return None;
    }
    let flow = Flow::symbolic(w.clone(), sol, Rational::zero());
    let both = Formula::and(sys.domain.clone(), post.clone());
    let table = AtomTable::along(&both, &flow).ok()?;
    let bound = table.upolys.iter().filter(|p| p.degree() > 0).map(|p| p.cauchy_bound()).max().unwrap_or_else(Rational::zero);
    let hi = bound + Rational::from_integer(1.into());
    // every root lies below `hi`, so the last cell extends to infinity
    let cs = cells(&table.upolys, &Rational::zero(), &hi).ok()?;
    for c in &cs {
        if !table.eval(&sys.domain, &c.signs) {
            break;
        }
        let v = table.eval(&post, &c.signs);
        if all && !v {
            return Some(Truth::False);
        }
        if !all && v {
            return Some(Truth::True);
        }
    }
    Some(Truth::from(all))
}

/// Eliminates assignment and test modalities with first-order postconditions.
/// `None` when an ODE, loop or trace postcondition remains.
pub(crate) fn reduce_fo(f: &Formula) -> Option<Formula> {
    Some(match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(reduce_fo(g)?),
        Formula::And(a, b) => Formula::and(reduce_fo(a)?, reduce_fo(b)?),
        Formula::Or(a, b) => Formula::or(reduce_fo(a)?, reduce_fo(b)?),
        Formula::Imp(a, b) => Formula::imp(reduce_fo(a)?, reduce_fo(b)?),
        Formula::Equiv(a, b) => Formula::equiv(reduce_fo(a)?, reduce_fo(b)?),
        Formula::Forall(x, g) => Formula::forall(x.clone(), reduce_fo(g)?),
        Formula::Exists(x, g) => Formula::exists(x.clone(), reduce_fo(g)?),
        Formula::BoxOp(p, k) | Formula::DiamondOp(p, k) => {
            let TraceFormula::State(post) = &**k else { return None };
            let boxed = matches!(f, Formula::BoxOp(..));
            let post = reduce_fo(post)?;
            match &**p {
                Program::Assign(x, e) => substitute(&post, x, e).ok()?,
                Program::Test(q) => {
                    let q = reduce_fo(q)?;
                    if boxed {
                        Formula::imp(q, post)
                    } else {
                        Formula::and(q, post)
                    }
                }
                Program::Seq(a, b) => {
                    let inner = if boxed {
                        Formula::box_state((**b).clone(), post)
                    } else {
                        Formula::diamond((**b).clone(), TraceFormula::State(post))
                    };
                    let outer = if boxed {
                        Formula::box_state((**a).clone(), inner)
                    } else {
                        Formula::diamond((**a).clone(), TraceFormula::State(inner))
                    };
                    reduce_fo(&outer)?
                }
                Program::Choice(a, b) => {
                    let side = |q: &Program| {
                        if boxed {
                            Formula::box_state(q.clone(), post.clone())
                        } else {
                            Formula::diamond(q.clone(), TraceFormula::State(post.clone()))
                        }
                    };
                    let (l, r) = (reduce_fo(&side(a))?, reduce_fo(&side(b))?);
                    if boxed {
                        Formula::and(l, r)
                    } else {
                        Formula::or(l, r)
                    }
                }
                Program::Ode(_) | Program::Loop(_) => return None,
            }
        }
    })
}

/// Quantified formulas: reduce modalities, plug in the state, then decide the
/// closed sentence with the arithmetic decision procedures.
fn eval_quantified(w: &State, f: &Formula) -> Truth {
    let Some(g) = reduce_fo(f) else {
        return Truth::Unknown(format!("quantifier over a formula with ODE or loop modalities: {f}"));
    };
    let vals = w.rational_values();
    let mut closed = g;
    for x in free_vars(&closed) {
        let Some(v) = vals.get(&x) else {
            return Truth::Unknown(SimError::Unvalued(x).to_string());
        };
        closed = match substitute(&closed, &x, &Poly::constant(v.clone())) {
            Ok(c) => c,
            Err(e) => return Truth::Unknown(e.to_string()),
        };
    }
    match check_validity(&closed) {
        Verdict::Valid(_) => return Truth::True,
        Verdict::Falsified(_) => return Truth::False,
        Verdict::Unknown(_) => {}
    }
    // a single quantifier over a quantifier-free body is decided in one variable
    match &closed {
        Formula::Forall(_, body) if body.is_quantifier_free() => match check_validity(body) {
            Verdict::Valid(_) => Truth::True,
            Verdict::Falsified(_) => Truth::False,
            Verdict::Unknown(why) => Truth::Unknown(why),
        },
        Formula::Exists(_, body) if body.is_quantifier_free() => match check_validity(&Formula::not((**body).clone())) {
            Verdict::Valid(_) => Truth::False,
            Verdict::Falsified(_) => Truth::True,
            Verdict::Unknown(why) => Truth::Unknown(why),
        },
        _ => Truth::Unknown(format!("cannot decide `{closed}`")),
    }
}

/// A postcondition together with its closure, computed once per query.
pub struct Postcondition {
    pub formula: Formula,
    closure: ClosureResult,
    relaxed: Formula,
}

impl Postcondition {
    pub fn new(formula: &Formula) -> Result<Postcondition, SimError> {
        if !formula.is_quantifier_free() {
            return Err(SimError::QuantifiedPostcondition(formula.to_string()));
        }
        Ok(Postcondition { formula: formula.clone(), closure: closure(formula), relaxed: relaxed_closure(formula) })
    }

    /// Whether the state lies in the topological closure of the formula's
    /// truth set. Exact when the closure is quantifier-free; otherwise decided
    /// by membership, by the relaxed superset, or by finding a direction along
    /// which the formula holds arbitrarily close to the state.
    pub fn closure_holds(&self, w: &State) -> Truth {
        if self.closure.quantifier_free {
            return match holds_qf(&self.closure.formula, w) {
                Ok(b) => Truth::from(b),
                Err(e) => Truth::Unknown(e.to_string()),
            };
        }
        match holds_qf(&self.formula, w) {
            Ok(true) => return Truth::True,
            Ok(false) => {}
            Err(e) => return Truth::Unknown(e.to_string()),
        }
        if let Ok(false) = holds_qf(&self.relaxed, w) {
            return Truth::False;
        }
        let vars: Vec<VarId> = free_vars(&self.formula).into_iter().collect();
        let point = w.rational_values();
        if vars.iter().any(|x| !point.contains_key(x)) {
            return Truth::Unknown("unvalued variable in postcondition".into());
        }
        let eps = VarId::fresh("eps", |v| vars.contains(v));
        for d in directions(vars.len()) {
            let shifted: BTreeMap<VarId, Poly> = vars
                .iter()
                .zip(&d)
                .map(|(x, c)| (x.clone(), &Poly::constant(point[x].clone()) + &Poly::var(&eps).scale(c)))
                .collect();
            let ok = eval_signs(&self.formula, &mut |p| {
                let q = p.substitute_all(&shifted);
                sign_near_zero(&q.to_upoly(&eps).expect("univariate in the step"))
            });
            if ok {
                return Truth::True;
            }
        }
        Truth::Unknown(format!("closure membership of `{}` at {w} not settled", self.formula))
    }
}

const RANDOM_DIRECTIONS: usize = 16;

fn directions(n: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1, -1] {
            let mut d = vec![Rational::zero(); n];
            d[i] = ratio(s, 1);
            out.push(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..RANDOM_DIRECTIONS {
        out.push((0..n).map(|_| ratio(rng.gen_range(-16..=16), rng.gen_range(1..=8))).collect());
    }
    out
}

/// Outcome of the time-almost-everywhere check on one trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum TaeVerdict {
    Holds {
        report: ViolationReport,
    },
    /// A zero-duration state outside the closure of the formula.
    FailedDiscrete {
        index: usize,
        state: State,
    },
    /// The formula fails on a set of positive measure.
    FailedContinuous {
        report: ViolationReport,
    },
    Unknown {
        reason: String,
    },
}

impl TaeVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, TaeVerdict::Holds { .. })
    }

    pub fn failed(&self) -> bool {
        matches!(self, TaeVerdict::FailedDiscrete { .. } | TaeVerdict::FailedContinuous { .. })
    }
}

/// Checks `tae: φ` on a trace: the discrete condition at every zero-duration
/// state and a null failure set on every flow of positive duration.
pub fn tae_eval(trace: &Trace, phi: &Formula, cfg: &EnumConfig) -> TaeVerdict {
    match Postcondition::new(phi) {
        Ok(post) => tae_eval_prepared(trace, &post, cfg, cfg.seed),
        Err(e) => TaeVerdict::Unknown { reason: e.to_string() },
    }
}

pub fn tae_eval_prepared(trace: &Trace, post: &Postcondition, cfg: &EnumConfig, seed: u64) -> TaeVerdict {
    let mut unknown: Option<String> = None;
    for (i, f) in trace.flows.iter().enumerate() {
        if !f.duration.is_zero() || f.is_abort() {
            continue;
        }
        let s = f.first();
        match post.closure_holds(&s) {
            Truth::True => {}
            Truth::False => return TaeVerdict::FailedDiscrete { index: i, state: s },
            Truth::Unknown(why) => {
                unknown.get_or_insert(why);
            }
        }
    }
    let mut total = ViolationReport::empty();
    let mut positive = false;
    for (i, f) in trace.flows.iter().enumerate() {
        if f.duration.is_zero() {
            continue;
        }
        let offset = position_to_time(trace, i, &Rational::zero()).expect("flow index in range");
        let report = match violation_measure(f, &post.formula, cfg, i, &offset, mix(seed, i as u64)) {
            Ok(r) => r,
            Err(e) => return TaeVerdict::Unknown { reason: e.to_string() },
        };
        match report.zero_test(&f.duration, cfg.zero_threshold) {
            ZeroTest::Zero => {}
            ZeroTest::Positive => positive = true,
            ZeroTest::Inconclusive => {
                unknown.get_or_insert(format!("violation measure {} on flow {i} is inconclusive", report.measure));
            }
        }
        total.merge(report);
    }
    if positive {
        return TaeVerdict::FailedContinuous { report: total };
    }
    match unknown {
        Some(reason) => TaeVerdict::Unknown { reason },
        None => TaeVerdict::Holds { report: total },
    }
}

/// SplitMix64 step, used to derive independent per-trace and per-flow seeds.
/// Seed of the `k`-th enumerated trace under the configured seed.
pub fn trace_seed(seed: u64, k: usize) -> u64 {
    mix(seed, k as u64)
}

pub(crate) fn mix(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxVerdict {
    Holds,
    Fails,
    Unknown(String),
}

impl BoxVerdict {
    pub fn truth(&self) -> Truth {
        match self {
            BoxVerdict::Holds => Truth::True,
            BoxVerdict::Fails => Truth::False,
            BoxVerdict::Unknown(w) => Truth::Unknown(w.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub trace: Trace,
    pub verdict: TaeVerdict,
}

/// `[α] tae: φ` over every enumerated trace.
#[derive(Debug, Clone)]
pub struct BoxTaeReport {
    pub verdict: BoxVerdict,
    pub records: Vec<TraceRecord>,
    /// Loops were cut off at the unroll bound.
    pub bounded: bool,
    /// Some flow was integrated numerically.
    pub statistical: bool,
}

impl BoxTaeReport {
    pub fn failures(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| r.verdict.failed())
    }
}

pub fn eval_box_tae(prog: &Program, w: &State, phi: &Formula, cfg: &EnumConfig) -> BoxTaeReport {
    let bounded = !prog.is_loop_free();
    let unknown =
        |reason: String| BoxTaeReport { verdict: BoxVerdict::Unknown(reason), records: Vec::new(), bounded, statistical: false };
    let post = match Postcondition::new(phi) {
        Ok(p) => p,
        Err(e) => return unknown(e.to_string()),
    };
    let traces = match enumerate_traces(prog, w, cfg) {
        Ok(t) => t,
        Err(e) => return unknown(e.to_string()),
    };
    let statistical = traces.iter().any(|t| !t.is_exact());
    let mut records = Vec::with_capacity(traces.len());
    let mut first_unknown = None;
    let mut failed = false;
    for (k, trace) in traces.into_iter().enumerate() {
        let verdict = tae_eval_prepared(&trace, &post, cfg, mix(cfg.seed, k as u64));
        failed |= verdict.failed();
        if let TaeVerdict::Unknown { reason } = &verdict {
            first_unknown.get_or_insert_with(|| reason.clone());
        }
        records.push(TraceRecord { trace, verdict });
    }
    let verdict = if failed {
        BoxVerdict::Fails
    } else if let Some(r) = first_unknown {
        BoxVerdict::Unknown(r)
    } else {
        BoxVerdict::Holds
    };
    BoxTaeReport { verdict, records, bounded, statistical }
}

fn eval_diamond_tae(prog: &Program, w: &State, phi: &Formula, cfg: &EnumConfig) -> Truth {
    let report = eval_box_tae(prog, w, phi, cfg);
    if let BoxVerdict::Unknown(why) = &report.verdict {
        if report.records.is_empty() {
            return Truth::Unknown(why.clone());
        }
    }
    let mut acc = Truth::False;
    for r in &report.records {
        let v = match &r.verdict {
            TaeVerdict::Holds { .. } => Truth::True,
            TaeVerdict::Unknown { reason } => Truth::Unknown(reason.clone()),
            _ => Truth::False,
        };
        acc = acc.or(|| v);
    }
    acc
}

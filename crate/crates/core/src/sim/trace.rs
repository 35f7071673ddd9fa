use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use super::state::{Real, State};
use super::SimError;
use crate::ode::{eval_solution, PolySolution, SampledFlow};
use crate::poly::{fmt_rational, rational_to_f64, Poly, UPoly};
use crate::syntax::VarId;
use crate::Rational;

#[derive(Debug, Clone)]
pub enum FlowKind {
    /// A single state held for zero time.
    Discrete(State),
    /// An exact polynomial flow from an exact initial state.
    Symbolic { init: State, solution: Arc<PolySolution> },
    /// RK4 samples; variables outside the system keep their initial values.
    Numeric { init: State, samples: Arc<SampledFlow>, evolving: Arc<Vec<VarId>> },
}

/// One piece of a trace: a function from `[0, duration]` to states.
#[derive(Debug, Clone)]
pub struct Flow {
    pub duration: Rational,
    pub kind: FlowKind,
}

impl Flow {
    pub fn discrete(s: State) -> Flow {
        Flow { duration: Rational::zero(), kind: FlowKind::Discrete(s) }
    }

    pub fn symbolic(init: State, solution: Arc<PolySolution>, duration: Rational) -> Flow {
        assert!(init.is_exact(), "symbolic flows need an exact initial state");
        Flow { duration, kind: FlowKind::Symbolic { init, solution } }
    }

    pub fn numeric(init: State, samples: Arc<SampledFlow>, evolving: Arc<Vec<VarId>>, duration: Rational) -> Flow {
        Flow { duration, kind: FlowKind::Numeric { init, samples, evolving } }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, FlowKind::Numeric { .. })
    }

    pub fn is_abort(&self) -> bool {
        matches!(&self.kind, FlowKind::Discrete(s) if s.is_abort())
    }

    pub fn first(&self) -> State {
        match &self.kind {
            FlowKind::Discrete(s) => s.clone(),
            FlowKind::Symbolic { init, .. } | FlowKind::Numeric { init, .. } => init.clone(),
        }
    }

    pub fn last(&self) -> State {
        self.at(&self.duration.clone())
    }

    /// The state at local time `t`, `0 <= t <= duration`.
    pub fn at(&self, t: &Rational) -> State {
        match &self.kind {
            FlowKind::Discrete(s) => s.clone(),
            FlowKind::Symbolic { init, solution } => {
                if t.is_zero() {
                    return init.clone();
                }
                let exact = init.exact_values().expect("exact initial state");
                let vals = eval_solution(solution, &exact, t).expect("solution reads only state variables");
                State::exact(vals)
            }
            FlowKind::Numeric { init, samples, evolving } => {
                if t.is_zero() {
                    return init.clone();
                }
                numeric_at(init, samples, evolving, rational_to_f64(t))
            }
        }
    }

    /// The state at a floating-point local time.
    pub fn at_f64(&self, t: f64) -> State {
        match &self.kind {
            FlowKind::Numeric { init, samples, evolving } => numeric_at(init, samples, evolving, t),
            _ => self.at(&Rational::from_float(t).unwrap_or_else(Rational::zero)),
        }
    }

    /// A term along an exact flow, as a polynomial in local time.
    pub fn along(&self, p: &Poly) -> Result<UPoly, SimError> {
        let FlowKind::Symbolic { init, solution } = &self.kind else {
            return Err(SimError::NotExact);
        };
        let q = p.substitute_all(&solution.as_map());
        let exact = init.exact_values().expect("exact initial state");
        let consts: BTreeMap<VarId, Poly> = q
            .vars()
            .into_iter()
            .filter(|x| x != &solution.time)
            .map(|x| exact.get(&x).map(|v| (x.clone(), Poly::constant(v.clone()))).ok_or(SimError::Unvalued(x)))
            .collect::<Result<_, _>>()?;
        Ok(q.substitute_all(&consts).to_upoly(&solution.time).expect("univariate in time"))
    }
}

fn numeric_at(init: &State, samples: &SampledFlow, evolving: &[VarId], t: f64) -> State {
    let xs = samples.state_at(t);
    let mut out = init.clone();
    for x in evolving {
        let i = samples.index_of(x).expect("evolving variable is sampled");
        out.set(x.clone(), Real::Approx(xs[i]));
    }
    out
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FlowKind::Discrete(s) => write!(f, "{s}"),
            FlowKind::Symbolic { init, .. } => write!(f, "flow[{}] from {init}", fmt_rational(&self.duration)),
            FlowKind::Numeric { init, .. } => write!(f, "numeric flow[{}] from {init}", fmt_rational(&self.duration)),
        }
    }
}

/// A nonempty sequence of flows. Nothing follows a failure state.
#[derive(Debug, Clone)]
pub struct Trace {
    pub flows: Vec<Flow>,
}

impl Trace {
    pub fn new(flows: Vec<Flow>) -> Trace {
        assert!(!flows.is_empty(), "traces are nonempty");
        assert!(flows[..flows.len() - 1].iter().all(|f| !f.is_abort()), "no flow follows a failure");
        Trace { flows }
    }

    pub fn point(s: State) -> Trace {
        Trace::new(vec![Flow::discrete(s)])
    }

    /// `(ω, fail)`
    pub fn failing(s: State) -> Trace {
        Trace::new(vec![Flow::discrete(s), Flow::discrete(State::aborted())])
    }

    pub fn first(&self) -> State {
        self.flows[0].first()
    }

    pub fn last(&self) -> State {
        self.flows.last().expect("nonempty").last()
    }

    pub fn terminates(&self) -> bool {
        !self.flows.last().expect("nonempty").is_abort()
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_exact(&self) -> bool {
        self.flows.iter().all(Flow::is_exact)
    }

    /// Total time on the trace axis: one unit per flow boundary plus durations.
    pub fn axis_length(&self) -> Rational {
        position_to_time(self, self.flows.len() - 1, &self.flows.last().unwrap().duration).expect("in range")
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.flows.iter().map(Flow::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Concatenation when `xi` terminates in the state `eta` starts from; `xi`
/// itself when it does not terminate.
pub fn compose(xi: &Trace, eta: &Trace) -> Result<Trace, SimError> {
    if !xi.terminates() {
        return Ok(xi.clone());
    }
    if xi.last() != eta.first() {
        return Err(SimError::NotComposable(format!("{} ends in {}, {} starts in {}", xi, xi.last(), eta, eta.first())));
    }
    let mut flows = xi.flows.clone();
    flows.extend(eta.flows.iter().cloned());
    Ok(Trace::new(flows))
}

/// `ζ + i + Σ_{k<i} |σ_k|`
pub fn position_to_time(trace: &Trace, i: usize, zeta: &Rational) -> Result<Rational, SimError> {
    let flow = trace.flows.get(i).ok_or(SimError::OutOfRange)?;
    if zeta < &Rational::zero() || zeta > &flow.duration {
        return Err(SimError::OutOfRange);
    }
    let before: Rational = trace.flows[..i].iter().map(|f| f.duration.clone()).sum();
    Ok(zeta + Rational::from_integer(i.into()) + before)
}

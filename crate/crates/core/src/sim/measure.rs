use std::fmt;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cells::{cells, AtomTable};
use super::state::{Real, State};
use super::trace::{Flow, FlowKind};
use super::{EnumConfig, SimError};
use crate::poly::{fmt_rational, rational_from_f64, rational_to_f64, IsolatedRoot};
use crate::syntax::Formula;
use crate::Rational;

/// Lebesgue measure of a failure set.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Exact(Rational),
    /// Exact algebraic endpoints known only up to isolating intervals.
    Bounds {
        lo: Rational,
        hi: Rational,
    },
    /// Monte Carlo estimate; `half_width` reaches the upper end of a 95%
    /// Wilson interval.
    Estimate {
        estimate: f64,
        half_width: f64,
        samples: usize,
        failures: usize,
    },
}

impl Measure {
    pub fn zero() -> Measure {
        Measure::Exact(Rational::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Measure::Exact(_))
    }

    pub fn lower(&self) -> f64 {
        match self {
            Measure::Exact(q) => rational_to_f64(q),
            Measure::Bounds { lo, .. } => rational_to_f64(lo),
            Measure::Estimate { estimate, .. } => *estimate,
        }
    }

    pub fn add(&self, other: &Measure) -> Measure {
        use Measure::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a + b),
            (Exact(a), Bounds { lo, hi }) | (Bounds { lo, hi }, Exact(a)) => Bounds { lo: lo + a, hi: hi + a },
            (Bounds { lo: a, hi: b }, Bounds { lo: c, hi: d }) => Bounds { lo: a + c, hi: b + d },
            (Estimate { estimate, half_width, samples, failures }, other)
            | (other, Estimate { estimate, half_width, samples, failures }) => match other {
                Estimate { estimate: e2, half_width: h2, samples: s2, failures: f2 } => Estimate {
                    estimate: estimate + e2,
                    half_width: half_width + h2,
                    samples: samples + s2,
                    failures: failures + f2,
                },
                exact => Estimate {
                    estimate: estimate + exact.lower(),
                    half_width: *half_width + (exact.upper() - exact.lower()),
                    samples: *samples,
                    failures: *failures,
                },
            },
        }
    }

    fn upper(&self) -> f64 {
        match self {
            Measure::Exact(q) => rational_to_f64(q),
            Measure::Bounds { hi, .. } => rational_to_f64(hi),
            Measure::Estimate { estimate, half_width, .. } => estimate + half_width,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Exact(q) => f.write_str(&fmt_rational(q)),
            Measure::Bounds { lo, hi } => write!(f, "in [{}, {}]", fmt_rational(lo), fmt_rational(hi)),
            Measure::Estimate { estimate, half_width, .. } => write!(f, "~{estimate:.3e} (+{half_width:.1e})"),
        }
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        match self {
            Measure::Exact(q) => {
                m.serialize_entry("kind", "exact")?;
                m.serialize_entry("value", &fmt_rational(q))?;
            }
            Measure::Bounds { lo, hi } => {
                m.serialize_entry("kind", "bounds")?;
                m.serialize_entry("lo", &fmt_rational(lo))?;
                m.serialize_entry("hi", &fmt_rational(hi))?;
            }
            Measure::Estimate { estimate, half_width, samples, failures } => {
                m.serialize_entry("kind", "estimate")?;
                m.serialize_entry("estimate", estimate)?;
                m.serialize_entry("half_width", half_width)?;
                m.serialize_entry("samples", samples)?;
                m.serialize_entry("failures", failures)?;
            }
        }
        m.end()
    }
}

/// A maximal time interval or point on one flow where the formula fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub flow: usize,
    pub from: IsolatedRoot,
    pub to: IsolatedRoot,
    pub from_closed: bool,
    pub to_closed: bool,
    /// Trace-axis time of the flow start.
    pub offset: Rational,
    pub approximate: bool,
}

impl Witness {
    pub fn is_point(&self) -> bool {
        self.from == self.to
    }

    /// Exact local endpoints, when known.
    pub fn exact_bounds(&self) -> Option<(Rational, Rational)> {
        Some((self.from.exact()?.clone(), self.to.exact()?.clone()))
    }

    fn fmt_local(&self, shift: &Rational) -> String {
        let end = |r: &IsolatedRoot| match r {
            IsolatedRoot::Exact(q) => fmt_rational(&(q + shift)),
            IsolatedRoot::Interval { .. } => format!("{:.6}", r.approx() + rational_to_f64(shift)),
        };
        let mark = if self.approximate { "~" } else { "" };
        if self.is_point() {
            return format!("{mark}{{{}}}", end(&self.from));
        }
        format!(
            "{mark}{}{}, {}{}",
            if self.from_closed { "[" } else { "(" },
            end(&self.from),
            end(&self.to),
            if self.to_closed { "]" } else { ")" }
        )
    }

    pub fn local(&self) -> String {
        self.fmt_local(&Rational::zero())
    }

    pub fn axis(&self) -> String {
        self.fmt_local(&self.offset)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flow {} at {} (trace time {})", self.flow, self.local(), self.axis())
    }
}

impl Serialize for Witness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("flow", &self.flow)?;
        m.serialize_entry("local", &self.local())?;
        m.serialize_entry("trace_time", &self.axis())?;
        m.serialize_entry("approximate", &self.approximate)?;
        m.end()
    }
}

/// Failure set of a formula along one flow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub measure: Measure,
    pub witnesses: Vec<Witness>,
    pub exact: bool,
}

/// Whether a measure counts as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    Positive,
    Inconclusive,
}

impl ViolationReport {
    pub fn empty() -> ViolationReport {
        ViolationReport { measure: Measure::zero(), witnesses: Vec::new(), exact: true }
    }

    /// Exact and bounded measures are compared with zero exactly; estimates
    /// count as zero when their upper end is below `threshold * duration`.
    pub fn zero_test(&self, duration: &Rational, threshold: f64) -> ZeroTest {
        match &self.measure {
            Measure::Exact(q) if q.is_zero() => ZeroTest::Zero,
            Measure::Exact(_) => ZeroTest::Positive,
            Measure::Bounds { lo, .. } if lo.is_positive() => ZeroTest::Positive,
            Measure::Bounds { .. } => ZeroTest::Inconclusive,
            Measure::Estimate { estimate, half_width, samples, failures } => {
                let limit = threshold * rational_to_f64(duration);
                if estimate + half_width < limit {
                    ZeroTest::Zero
                } else if wilson(*failures, *samples).0 * rational_to_f64(duration) > limit {
                    ZeroTest::Positive
                } else {
                    ZeroTest::Inconclusive
                }
            }
        }
    }

    pub fn merge(&mut self, other: ViolationReport) {
        self.measure = self.measure.add(&other.measure);
        self.witnesses.extend(other.witnesses);
        self.exact &= other.exact;
    }
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// The set of times in `[0, duration]` at which `phi` fails along `flow`.
/// `index` and `offset` place the witnesses on the trace.
pub fn violation_measure(
    flow: &Flow,
    phi: &Formula,
    cfg: &EnumConfig,
    index: usize,
    offset: &Rational,
    seed: u64,
) -> Result<ViolationReport, SimError> {
    if !phi.is_quantifier_free() {
        return Err(SimError::QuantifiedPostcondition(phi.to_string()));
    }
    if flow.duration.is_zero() || matches!(flow.kind, FlowKind::Discrete(_)) {
        return Ok(ViolationReport::empty());
    }
    match &flow.kind {
        FlowKind::Symbolic { .. } => exact_measure(flow, phi, index, offset),
        FlowKind::Numeric { .. } => Ok(sampled_measure(flow, phi, cfg, index, offset, seed)),
        FlowKind::Discrete(_) => unreachable!(),
    }
}

fn exact_measure(flow: &Flow, phi: &Formula, index: usize, offset: &Rational) -> Result<ViolationReport, SimError> {
    let table = AtomTable::along(phi, flow)?;
    let cs = cells(&table.upolys, &Rational::zero(), &flow.duration)?;
    let mut measure = Measure::zero();
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut open: Option<Witness> = None;
    for c in &cs {
        if table.eval(phi, &c.signs) {
            if let Some(w) = open.take() {
                witnesses.push(w);
            }
            continue;
        }
        if !c.point {
            let (lo, hi) = c.length_bounds();
            let piece = if c.is_exact() { Measure::Exact(lo) } else { Measure::Bounds { lo, hi } };
            measure = measure.add(&piece);
        }
        match &mut open {
            Some(w) => {
                w.to = c.to.clone();
                w.to_closed = c.to_closed;
            }
            None => {
                open = Some(Witness {
                    flow: index,
                    from: c.from.clone(),
                    to: c.to.clone(),
                    from_closed: c.from_closed,
                    to_closed: c.to_closed,
                    offset: offset.clone(),
                    approximate: false,
                })
            }
        }
    }
    witnesses.extend(open);
    let exact = measure.is_exact();
    Ok(ViolationReport { measure, witnesses, exact })
}

/// Truth of a quantifier-free formula at a state, exactly or in floating point.
pub(crate) fn holds_qf(phi: &Formula, s: &State) -> Result<bool, SimError> {
    let mut err = None;
    let v = super::cells::eval_signs(phi, &mut |p| match s.eval(p) {
        Ok(Real::Exact(q)) => crate::poly::Sign::of(&q),
        Ok(Real::Approx(x)) => {
            if x > 0.0 {
                crate::poly::Sign::Pos
            } else if x < 0.0 {
                crate::poly::Sign::Neg
            } else {
                crate::poly::Sign::Zero
            }
        }
        Err(e) => {
            err.get_or_insert(e);
            crate::poly::Sign::Zero
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

const WITNESS_GRID: usize = 2000;

fn sampled_measure(flow: &Flow, phi: &Formula, cfg: &EnumConfig, index: usize, offset: &Rational, seed: u64) -> ViolationReport {
    let r = rational_to_f64(&flow.duration);
    let n = cfg.mc_samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fails = |t: f64| !holds_qf(phi, &flow.at_f64(t)).unwrap_or(true);
    let failures = (0..n).filter(|_| fails(rng.gen::<f64>() * r)).count();
    let p = failures as f64 / n as f64;
    let (_, hi) = wilson(failures, n);
    let measure = Measure::Estimate { estimate: p * r, half_width: (hi - p) * r, samples: n, failures };

    let mut witnesses = Vec::new();
    let step = r / WITNESS_GRID as f64;
    let mut run: Option<(f64, f64)> = None;
    for k in 0..=WITNESS_GRID {
        let t = k as f64 * step;
        if fails(t) {
            run = Some(match run {
                Some((a, _)) => (a, t),
                None => (t, t),
            });
        } else if let Some((a, b)) = run.take() {
            witnesses.push(sampled_witness(a, b, index, offset));
        }
    }
    if let Some((a, b)) = run {
        witnesses.push(sampled_witness(a, b, index, offset));
    }
    ViolationReport { measure, witnesses, exact: false }
}

fn sampled_witness(a: f64, b: f64, index: usize, offset: &Rational) -> Witness {
    let q = |x: f64| IsolatedRoot::Exact(rational_from_f64(x).unwrap_or_else(Rational::zero));
    Witness { flow: index, from: q(a), to: q(b), from_closed: true, to_closed: true, offset: offset.clone(), approximate: true }
}

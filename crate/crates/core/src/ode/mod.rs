//! Polynomial solutions of ODE systems and a fixed-step numeric fallback.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;

use crate::poly::{rat, rational_to_f64, Poly};
use crate::syntax::{OdeSystem, VarId};
use crate::Rational;

pub const DEFAULT_DEPTH: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OdeError {
    #[error("`{var}` has no polynomial solution: its Lie derivatives repeat up to a constant factor")]
    NotPolynomialSolvable { var: VarId },
    #[error("Lie derivatives of `{var}` did not vanish within {depth} steps")]
    DepthExceeded { var: VarId, depth: usize },
}

/// `x_i(t) = y_i(t)` where each `y_i` is a polynomial in the time variable whose
/// other variables stand for initial values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySolution {
    pub time: VarId,
    pub components: Vec<(VarId, Poly)>,
}

impl PolySolution {
    pub fn get(&self, x: &VarId) -> Option<&Poly> {
        self.components.iter().find(|(y, _)| y == x).map(|(_, p)| p)
    }

    /// The solution with time replaced by `s`.
    pub fn at_time(&self, s: &Poly) -> BTreeMap<VarId, Poly> {
        self.components.iter().map(|(x, p)| (x.clone(), p.substitute(&self.time, s))).collect()
    }

    pub fn as_map(&self) -> BTreeMap<VarId, Poly> {
        self.components.iter().cloned().collect()
    }
}

impl fmt::Display for PolySolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, p)) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}({}) = {p}", self.time)?;
        }
        Ok(())
    }
}

/// Lie derivative of `p` along the vector field of the system.
pub fn lie_derivative(sys: &OdeSystem, p: &Poly) -> Poly {
    sys.eqs.iter().fold(Poly::zero(), |acc, (x, f)| acc + p.derivative(x) * f)
}

pub fn solve_polynomial(sys: &OdeSystem) -> Result<PolySolution, OdeError> {
    solve_polynomial_avoiding(sys, &BTreeSet::new(), DEFAULT_DEPTH)
}

/// Taylor expansion by iterated Lie derivatives; succeeds when every variable's
/// derivatives vanish within `depth` steps. The time variable avoids `avoid`.
pub fn solve_polynomial_avoiding(sys: &OdeSystem, avoid: &BTreeSet<VarId>, depth: usize) -> Result<PolySolution, OdeError> {
    let mut taken: BTreeSet<VarId> = avoid.clone();
    for (x, f) in &sys.eqs {
        taken.insert(x.clone());
        taken.extend(f.vars());
    }
    taken.extend(sys.domain.all_vars());
    let time = VarId::fresh("t", |v| taken.contains(v));
    let t = Poly::var(&time);
    let mut components = Vec::new();
    for (x, _) in &sys.eqs {
        let mut derivs: Vec<Poly> = vec![Poly::var(x)];
        loop {
            let next = lie_derivative(sys, derivs.last().unwrap());
            if next.is_zero() {
                break;
            }
            if derivs.iter().any(|d| proportional(&next, d)) {
                return Err(OdeError::NotPolynomialSolvable { var: x.clone() });
            }
            if derivs.len() > depth {
                return Err(OdeError::DepthExceeded { var: x.clone(), depth });
            }
            derivs.push(next);
        }
        let mut y = Poly::zero();
        let mut factorial = Rational::one();
        for (k, d) in derivs.iter().enumerate() {
            if k > 0 {
                factorial *= rat(k as i64);
            }
            y = y + (d * &t.pow(k as u32)).scale(&(Rational::one() / &factorial));
        }
        components.push((x.clone(), y));
    }
    Ok(PolySolution { time, components })
}

/// `a = c * b` for a nonzero constant `c`.
fn proportional(a: &Poly, b: &Poly) -> bool {
    if a.is_zero() || b.is_zero() || a.num_terms() != b.num_terms() {
        return false;
    }
    let (ma, ca) = a.terms().next().unwrap();
    let Some(cb) = b.terms().find(|(m, _)| *m == ma).map(|(_, c)| c) else { return false };
    let c = ca / cb;
    &b.scale(&c) == a
}

/// Checks `d/dt y_i = f_i(y)` and `y_i(0) = x_i` as polynomial identities.
pub fn verify_solution(sys: &OdeSystem, sol: &PolySolution) -> bool {
    if sol.components.len() != sys.eqs.len() || sys.eqs.iter().any(|(x, _)| sol.get(x).is_none()) {
        return false;
    }
    let map = sol.as_map();
    sys.eqs.iter().all(|(x, f)| {
        let y = sol.get(x).unwrap();
        let dy = y.derivative(&sol.time);
        let rhs = f.substitute_all(&map);
        let y0 = y.substitute(&sol.time, &Poly::zero());
        dy == rhs && y0 == Poly::var(x)
    })
}

/// Polynomial compiled for fast floating-point evaluation over indexed variables.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly, index: &BTreeMap<VarId, usize>) -> Option<CompiledPoly> {
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            let mut fs = Vec::new();
            for (v, e) in m.factors() {
                fs.push((*index.get(v)?, *e as i32));
            }
            terms.push((rational_to_f64(c), fs));
        }
        Some(CompiledPoly { terms })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, fs)| fs.iter().fold(*c, |acc, (i, e)| acc * x[*i].powi(*e))).sum()
    }
}

/// RK4 samples of a flow at `0, h, 2h, ..., r`.
#[derive(Debug, Clone)]
pub struct SampledFlow {
    pub vars: Vec<VarId>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    rhs: Vec<(usize, CompiledPoly)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("variable `{0}` has no value")]
    Unvalued(VarId),
}

impl SampledFlow {
    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn index_of(&self, x: &VarId) -> Option<usize> {
        self.vars.iter().position(|v| v == x)
    }

    /// State at time `t`, by a partial RK4 step from the preceding sample.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let k = match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(k) => return self.values[k].clone(),
            Err(0) => 0,
            Err(k) => k - 1,
        };
        rk4_step(&self.rhs, &self.values[k], t - self.times[k])
    }
}

fn rk4_step(rhs: &[(usize, CompiledPoly)], x: &[f64], h: f64) -> Vec<f64> {
    let deriv = |y: &[f64]| {
        let mut d = vec![0.0; y.len()];
        for (i, p) in rhs {
            d[*i] = p.eval(y);
        }
        d
    };
    let axpy = |y: &[f64], k: &[f64], a: f64| y.iter().zip(k).map(|(u, v)| u + a * v).collect::<Vec<f64>>();
    let k1 = deriv(x);
    let k2 = deriv(&axpy(x, &k1, h / 2.0));
    let k3 = deriv(&axpy(x, &k2, h / 2.0));
    let k4 = deriv(&axpy(x, &k3, h));
    let mut out = x.to_vec();
    for (i, _) in rhs {
        out[*i] = x[*i] + h / 6.0 * (k1[*i] + 2.0 * k2[*i] + 2.0 * k3[*i] + k4[*i]);
    }
    out
}

/// Classical RK4 with fixed step `h`; the last step is shortened to land on `r`.
/// Variables outside the system keep their initial values exactly.
pub fn numeric_flow(sys: &OdeSystem, state: &BTreeMap<VarId, f64>, r: f64, h: f64) -> Result<SampledFlow, FlowError> {
    assert!(r >= 0.0 && h > 0.0, "duration must be nonnegative and step positive");
    let mut vars: Vec<VarId> = state.keys().cloned().collect();
    for (x, f) in &sys.eqs {
        for v in std::iter::once(x).chain(f.vars().iter()) {
            if !state.contains_key(v) {
                return Err(FlowError::Unvalued(v.clone()));
            }
        }
    }
    vars.sort();
    let index: BTreeMap<VarId, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let rhs: Vec<(usize, CompiledPoly)> =
        sys.eqs.iter().map(|(x, f)| (index[x], CompiledPoly::new(f, &index).expect("checked above"))).collect();
    let mut cur: Vec<f64> = vars.iter().map(|v| state[v]).collect();
    let mut times = vec![0.0];
    let mut values = vec![cur.clone()];
    let steps = (r / h).floor() as usize;
    for k in 1..=steps {
        cur = rk4_step(&rhs, &cur, h);
        times.push(k as f64 * h);
        values.push(cur.clone());
    }
    let done = steps as f64 * h;
    if r - done > 1e-12 * r.max(1.0) {
        cur = rk4_step(&rhs, &cur, r - done);
        times.push(r);
        values.push(cur);
    } else if let Some(last) = times.last_mut() {
        *last = r;
    }
    Ok(SampledFlow { vars, times, values, rhs })
}

/// Polynomial solution evaluated at a concrete initial state and time.
pub fn eval_solution(sol: &PolySolution, init: &BTreeMap<VarId, Rational>, time: &Rational) -> Option<BTreeMap<VarId, Rational>> {
    let mut out = init.clone();
    for (x, p) in &sol.components {
        let val = |v: &VarId| if *v == sol.time { Some(time.clone()) } else { init.get(v).cloned() };
        out.insert(x.clone(), p.eval(&val)?);
    }
    Some(out)
}

#[cfg(test)]
mod tests;

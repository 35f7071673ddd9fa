use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::SimError;
use crate::poly::{fmt_rational, rational_from_f64, rational_to_f64, Poly};
use crate::syntax::VarId;
use crate::Rational;

/// A real value: exact when it came from exact arithmetic, a double when it
/// came from numeric integration.
#[derive(Debug, Clone, PartialEq)]
pub enum Real {
    Exact(Rational),
    Approx(f64),
}

impl Real {
    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(q) => rational_to_f64(q),
            Real::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Real::Exact(q) => Some(q),
            Real::Approx(_) => None,
        }
    }

    /// The exact value, or the exact binary value of the double.
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            Real::Exact(q) => Some(q.clone()),
            Real::Approx(x) => rational_from_f64(*x),
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(q) => f.write_str(&fmt_rational(q)),
            Real::Approx(x) => write!(f, "~{x:.6}"),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A program state, or the failure state when `abort` is set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct State {
    values: BTreeMap<VarId, Real>,
    abort: bool,
}

impl State {
    pub fn new(values: BTreeMap<VarId, Real>) -> State {
        State { values, abort: false }
    }

    pub fn exact(values: impl IntoIterator<Item = (VarId, Rational)>) -> State {
        State::new(values.into_iter().map(|(x, q)| (x, Real::Exact(q))).collect())
    }

    pub fn aborted() -> State {
        State { values: BTreeMap::new(), abort: true }
    }

    pub fn is_abort(&self) -> bool {
        self.abort
    }

    pub fn values(&self) -> &BTreeMap<VarId, Real> {
        &self.values
    }

    pub fn get(&self, x: &VarId) -> Option<&Real> {
        assert!(!self.abort, "reading a variable of the failure state");
        self.values.get(x)
    }

    pub fn set(&mut self, x: VarId, v: Real) {
        assert!(!self.abort, "writing a variable of the failure state");
        self.values.insert(x, v);
    }

    pub fn with(&self, x: &VarId, v: Real) -> State {
        let mut s = self.clone();
        s.set(x.clone(), v);
        s
    }

    pub fn is_exact(&self) -> bool {
        self.values.values().all(|v| v.exact().is_some())
    }

    pub fn exact_values(&self) -> Option<BTreeMap<VarId, Rational>> {
        self.values.iter().map(|(x, v)| Some((x.clone(), v.exact()?.clone()))).collect()
    }

    pub fn f64_values(&self) -> BTreeMap<VarId, f64> {
        self.values.iter().map(|(x, v)| (x.clone(), v.to_f64())).collect()
    }

    /// Exact values, reading doubles as their exact binary value.
    pub fn rational_values(&self) -> BTreeMap<VarId, Rational> {
        self.values.iter().filter_map(|(x, v)| Some((x.clone(), v.to_rational()?))).collect()
    }

    /// Value of a term: exact when every variable it reads is exact.
    pub fn eval(&self, p: &Poly) -> Result<Real, SimError> {
        for x in p.vars() {
            if !self.values.contains_key(&x) {
                return Err(SimError::Unvalued(x));
            }
        }
        let exact = p.vars().iter().all(|x| self.values[x].exact().is_some());
        if exact {
            let v = p.eval(&|x| self.values.get(x).and_then(|v| v.exact().cloned())).expect("all variables valued");
            Ok(Real::Exact(v))
        } else {
            let v = p.eval_f64(&|x| self.values.get(x).map(Real::to_f64)).expect("all variables valued");
            Ok(Real::Approx(v))
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.abort {
            return f.write_str("fail");
        }
        let parts: Vec<String> = self.values.iter().map(|(x, v)| format!("{x} = {v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.abort {
            return s.serialize_str("fail");
        }
        self.values.serialize(s)
    }
}

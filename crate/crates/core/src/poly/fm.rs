//! Fourier–Motzkin quantifier elimination over linear real arithmetic.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::{rat, Poly};
use crate::syntax::{Atom, Cmp, Formula, VarId};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QeError {
    #[error("quantified variable `{var}` occurs nonlinearly in `{atom}`")]
    NonlinearQuantifier { var: VarId, atom: String },
    #[error("formula contains modalities")]
    NotFirstOrder,
    #[error("disjunctive normal form exceeds {0} clauses")]
    TooLarge(usize),
}

const MAX_CLAUSES: usize = 200_000;

/// `poly rel 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Rel {
    Eq,
    Lt,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Lin {
    pub poly: Poly,
    pub rel: Rel,
}

impl Lin {
    fn new(poly: Poly, rel: Rel) -> Lin {
        // canonical scaling so duplicate constraints compare equal
        let lc = poly.leading_coefficient();
        let poly = if lc.is_zero() {
            poly
        } else if rel == Rel::Eq {
            poly.scale(&(Rational::one() / lc))
        } else {
            poly.scale(&(Rational::one() / lc.abs()))
        };
        Lin { poly, rel }
    }

    fn constant_truth(&self) -> Option<bool> {
        let c = self.poly.as_constant()?;
        Some(match self.rel {
            Rel::Eq => c.is_zero(),
            Rel::Lt => c.is_negative(),
            Rel::Le => !c.is_positive(),
        })
    }

    #[cfg(test)]
    pub(crate) fn holds_at(&self, val: &dyn Fn(&VarId) -> Option<Rational>) -> Option<bool> {
        let c = self.poly.eval(val)?;
        Some(match self.rel {
            Rel::Eq => c.is_zero(),
            Rel::Lt => c.is_negative(),
            Rel::Le => !c.is_positive(),
        })
    }

    pub(crate) fn to_formula(&self) -> Formula {
        let cmp = match self.rel {
            Rel::Eq => Cmp::Eq,
            Rel::Lt => Cmp::Lt,
            Rel::Le => Cmp::Le,
        };
        Formula::Atom(oriented(&Atom::new(self.poly.clone(), cmp)))
    }
}

/// Scales an atom by a positive factor and flips it if needed so its leading
/// coefficient is `1`: `100 - v >= 0` becomes `v - 100 <= 0`.
pub fn oriented(a: &Atom) -> Atom {
    let lc = a.poly.leading_coefficient();
    if lc.is_zero() {
        return a.clone();
    }
    let poly = a.poly.scale(&(Rational::one() / lc.abs()));
    if lc.is_negative() {
        Atom::new(-poly, a.cmp.flip())
    } else {
        Atom::new(poly, a.cmp)
    }
}

/// Conjunction of linear constraints.
pub(crate) type Conj = Vec<Lin>;

/// Simplifies a clause: drops true constants, returns `None` if some constant is false.
fn tidy(conj: Conj) -> Option<Conj> {
    let mut out: Conj = Vec::new();
    for l in conj {
        match l.constant_truth() {
            Some(true) => {}
            Some(false) => return None,
            None => {
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        }
    }
    Some(out)
}

/// Disjunctive normal form of a quantifier-free formula as a list of clauses.
pub(crate) fn dnf(f: &Formula) -> Result<Vec<Conj>, QeError> {
    let clauses = dnf_nnf(&f.nnf())?;
    Ok(clauses.into_iter().filter_map(tidy).collect())
}

fn dnf_nnf(f: &Formula) -> Result<Vec<Conj>, QeError> {
    Ok(match f {
        Formula::Atom(a) => {
            let e = &a.poly;
            match a.cmp {
                Cmp::Eq => vec![vec![Lin::new(e.clone(), Rel::Eq)]],
                Cmp::Ne => vec![vec![Lin::new(e.clone(), Rel::Lt)], vec![Lin::new(-e, Rel::Lt)]],
                Cmp::Lt => vec![vec![Lin::new(e.clone(), Rel::Lt)]],
                Cmp::Le => vec![vec![Lin::new(e.clone(), Rel::Le)]],
                Cmp::Gt => vec![vec![Lin::new(-e, Rel::Lt)]],
                Cmp::Ge => vec![vec![Lin::new(-e, Rel::Le)]],
            }
        }
        Formula::Or(a, b) => {
            let mut l = dnf_nnf(a)?;
            l.extend(dnf_nnf(b)?);
            if l.len() > MAX_CLAUSES {
                return Err(QeError::TooLarge(MAX_CLAUSES));
            }
            l
        }
        Formula::And(a, b) => {
            let (l, r) = (dnf_nnf(a)?, dnf_nnf(b)?);
            if l.len() * r.len() > MAX_CLAUSES {
                return Err(QeError::TooLarge(MAX_CLAUSES));
            }
            let mut out = Vec::with_capacity(l.len() * r.len());
            for x in &l {
                for y in &r {
                    let mut c = x.clone();
                    c.extend(y.iter().cloned());
                    if let Some(c) = tidy(c) {
                        out.push(c);
                    }
                }
            }
            out
        }
        other => unreachable!("dnf of non-NNF formula {other}"),
    })
}

/// Formula of a DNF, with constant simplification.
pub(crate) fn dnf_to_formula(clauses: &[Conj]) -> Formula {
    if clauses.iter().any(|c| c.is_empty()) {
        return Formula::tt();
    }
    Formula::or_all(clauses.iter().map(|c| Formula::and_all(c.iter().map(Lin::to_formula))))
}

/// A bound on `x` read off `c*x + r rel 0`.
struct Bound {
    value: Poly,
    strict: bool,
}

/// Eliminates `∃x` from a clause. `None` when the result is unsatisfiable.
pub(crate) fn eliminate_in_clause(conj: &Conj, x: &VarId) -> Result<Option<Conj>, QeError> {
    let mut free: Conj = Vec::new();
    let mut eqs: Vec<(Rational, Poly)> = Vec::new();
    let mut lower: Vec<Bound> = Vec::new();
    let mut upper: Vec<Bound> = Vec::new();
    for l in conj {
        let Some((c, r)) = linear_coefficient(&l.poly, x)? else {
            free.push(l.clone());
            continue;
        };
        match l.rel {
            Rel::Eq => eqs.push((c, r)),
            Rel::Lt | Rel::Le => {
                // c*x + r rel 0  <=>  x rel' -r/c
                let value = r.scale(&(-Rational::one() / &c));
                let b = Bound { value, strict: l.rel == Rel::Lt };
                if c.is_positive() {
                    upper.push(b);
                } else {
                    lower.push(b);
                }
            }
        }
    }
    if let Some((c, r)) = eqs.first() {
        let sol = r.scale(&(-Rational::one() / c));
        let substituted: Conj = conj.iter().map(|l| Lin::new(l.poly.substitute(x, &sol), l.rel)).collect();
        return Ok(tidy(substituted));
    }
    for lo in &lower {
        for hi in &upper {
            let rel = if lo.strict || hi.strict { Rel::Lt } else { Rel::Le };
            free.push(Lin::new(&lo.value - &hi.value, rel));
        }
    }
    Ok(tidy(free))
}

/// `(c, r)` with `p = c*x + r` and `c` a nonzero constant; `None` when `x` does not occur.
fn linear_coefficient(p: &Poly, x: &VarId) -> Result<Option<(Rational, Poly)>, QeError> {
    if !p.contains_var(x) {
        return Ok(None);
    }
    let nonlinear = || QeError::NonlinearQuantifier { var: x.clone(), atom: format!("{p}") };
    let (c, r) = p.linear_split(x).ok_or_else(nonlinear)?;
    let c = c.as_constant().ok_or_else(nonlinear)?;
    Ok(Some((c, r)))
}

/// Eliminates `∃x` from a quantifier-free formula.
pub fn fm_eliminate_var(f: &Formula, x: &VarId) -> Result<Formula, QeError> {
    let mut out = Vec::new();
    for c in dnf(f)? {
        if let Some(c) = eliminate_in_clause(&c, x)? {
            if c.is_empty() {
                return Ok(Formula::tt());
            }
            out.push(c);
        }
    }
    Ok(dnf_to_formula(&dedup(out)))
}

fn dedup(mut clauses: Vec<Conj>) -> Vec<Conj> {
    for c in &mut clauses {
        c.sort_by(|a, b| format!("{:?}", a).cmp(&format!("{:?}", b)));
    }
    let mut out: Vec<Conj> = Vec::new();
    for c in clauses {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Quantifier-free equivalent of a first-order formula whose quantified
/// variables occur linearly with constant coefficients.
pub fn fm_eliminate(f: &Formula) -> Result<Formula, QeError> {
    if !f.is_first_order() {
        return Err(QeError::NotFirstOrder);
    }
    eliminate(f)
}

fn eliminate(f: &Formula) -> Result<Formula, QeError> {
    Ok(match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => simplify(&Formula::not(eliminate(g)?)),
        Formula::And(a, b) => simplify(&Formula::and(eliminate(a)?, eliminate(b)?)),
        Formula::Or(a, b) => simplify(&Formula::or(eliminate(a)?, eliminate(b)?)),
        Formula::Imp(a, b) => simplify(&Formula::imp(eliminate(a)?, eliminate(b)?)),
        Formula::Equiv(a, b) => simplify(&Formula::equiv(eliminate(a)?, eliminate(b)?)),
        Formula::Exists(x, g) => fm_eliminate_var(&eliminate(g)?, x)?,
        Formula::Forall(x, g) => {
            let neg = Formula::not(eliminate(g)?);
            simplify(&Formula::not(fm_eliminate_var(&neg, x)?))
        }
        Formula::BoxOp(..) | Formula::DiamondOp(..) => return Err(QeError::NotFirstOrder),
    })
}

/// Folds constant atoms and pushes negations onto atoms.
pub fn simplify(f: &Formula) -> Formula {
    fold(&f.nnf())
}

fn fold(f: &Formula) -> Formula {
    match f {
        Formula::Atom(a) => match a.constant_value() {
            Some(true) => Formula::tt(),
            Some(false) => Formula::ff(),
            None => Formula::Atom(oriented(a)),
        },
        Formula::And(a, b) => {
            let (a, b) = (fold(a), fold(b));
            if a.is_false_literal() || b.is_false_literal() {
                Formula::ff()
            } else if a.is_true_literal() {
                b
            } else if b.is_true_literal() || a == b {
                a
            } else {
                Formula::and(a, b)
            }
        }
        Formula::Or(a, b) => {
            let (a, b) = (fold(a), fold(b));
            if a.is_true_literal() || b.is_true_literal() {
                Formula::tt()
            } else if a.is_false_literal() {
                b
            } else if b.is_false_literal() || a == b {
                a
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Forall(x, g) => Formula::forall(x.clone(), fold(g)),
        Formula::Exists(x, g) => Formula::exists(x.clone(), fold(g)),
        other => other.clone(),
    }
}

/// Closure of a quantifier-free linear formula: the union of the closures of
/// its nonempty disjunctive clauses, each obtained by relaxing strict bounds.
pub(crate) fn linear_closure(f: &Formula) -> Result<Formula, QeError> {
    let mut out: Vec<Conj> = Vec::new();
    for conj in dnf(f)? {
        let vars: Vec<VarId> = conj.iter().flat_map(|l| l.poly.vars()).collect::<BTreeSet<_>>().into_iter().collect();
        if solve_clause(&conj, &vars)?.is_none() {
            continue;
        }
        let relaxed: Conj = conj.into_iter().map(|l| Lin { rel: if l.rel == Rel::Lt { Rel::Le } else { l.rel }, ..l }).collect();
        if let Some(c) = tidy(relaxed) {
            out.push(c);
        }
    }
    let out = dedup(out);
    // a clause with a subset of another's constraints covers it
    let out: Vec<Conj> = out
        .iter()
        .enumerate()
        .filter(|(i, c)| !out.iter().enumerate().any(|(j, d)| j != *i && d.len() < c.len() && d.iter().all(|l| c.contains(l))))
        .map(|(_, c)| c.clone())
        .collect();
    if out.is_empty() {
        return Ok(Formula::ff());
    }
    Ok(dnf_to_formula(&out))
}

/// A rational point satisfying every constraint of the clause, found by
/// eliminating the variables in order and substituting back.
pub(crate) fn solve_clause(conj: &Conj, vars: &[VarId]) -> Result<Option<BTreeMap<VarId, Rational>>, QeError> {
    let Some((x, rest)) = vars.split_first() else {
        return Ok(conj.iter().all(|l| l.constant_truth() == Some(true)).then(BTreeMap::new));
    };
    let Some(reduced) = eliminate_in_clause(conj, x)? else {
        return Ok(None);
    };
    let Some(mut sol) = solve_clause(&reduced, rest)? else {
        return Ok(None);
    };
    // Now only x is unknown in the original clause.
    let partial: Conj = conj
        .iter()
        .map(|l| {
            let mut p = l.poly.clone();
            for (v, q) in &sol {
                p = p.substitute(v, &Poly::constant(q.clone()));
            }
            Lin { poly: p, rel: l.rel }
        })
        .collect();
    let value = pick_value(&partial, x)?;
    sol.insert(x.clone(), value);
    Ok(Some(sol))
}

fn pick_value(conj: &Conj, x: &VarId) -> Result<Rational, QeError> {
    let mut lo: Option<(Rational, bool)> = None;
    let mut hi: Option<(Rational, bool)> = None;
    for l in conj {
        let Some((c, r)) = linear_coefficient(&l.poly, x)? else { continue };
        let v = -r.as_constant().expect("all other variables substituted") / &c;
        match l.rel {
            Rel::Eq => return Ok(v),
            Rel::Lt | Rel::Le => {
                let strict = l.rel == Rel::Lt;
                if c.is_positive() {
                    if hi.as_ref().is_none_or(|(h, s)| v < *h || (v == *h && strict && !s)) {
                        hi = Some((v, strict));
                    }
                } else if lo.as_ref().is_none_or(|(h, s)| v > *h || (v == *h && strict && !s)) {
                    lo = Some((v, strict));
                }
            }
        }
    }
    Ok(match (lo, hi) {
        (None, None) => Rational::zero(),
        (Some((l, s)), None) => {
            if s {
                l + Rational::one()
            } else {
                l
            }
        }
        (None, Some((h, s))) => {
            if s {
                h - Rational::one()
            } else {
                h
            }
        }
        (Some((l, _)), Some((h, _))) if l == h => l,
        (Some((l, _)), Some((h, _))) => (l + h) / rat(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_state_formula;

    fn f(s: &str) -> Formula {
        parse_state_formula(s).unwrap()
    }

    #[test]
    fn empty_interval_is_false() {
        assert!(fm_eliminate(&f("exists x (x > 3 & x < 2)")).unwrap().is_false_literal());
    }

    #[test]
    fn equality_witness_is_true() {
        assert!(fm_eliminate(&f("exists x (x = y)")).unwrap().is_true_literal());
    }

    #[test]
    fn parametric_bounds() {
        let g = fm_eliminate(&f("exists x (a < x & x < b)")).unwrap();
        assert_eq!(g, f("a - b < 0"));
        assert_eq!(g.to_string(), "a < b");
    }

    #[test]
    fn universal_over_interval() {
        let g = fm_eliminate(&f("forall s (0 <= s & s <= t -> s <= 5)")).unwrap();
        // true iff t <= 5 or t < 0
        for (t, want) in [(-1, true), (0, true), (5, true), (6, false)] {
            let val = |_: &VarId| Some(rat(t));
            let got = eval_qf(&g, &val);
            assert_eq!(got, want, "t = {t}: {g}");
        }
    }

    #[test]
    fn nonlinear_quantifier_is_reported() {
        let e = fm_eliminate(&f("exists x (x^2 < 2)")).unwrap_err();
        assert!(matches!(e, QeError::NonlinearQuantifier { .. }));
        let e = fm_eliminate(&f("exists x (a*x < 2)")).unwrap_err();
        assert!(matches!(e, QeError::NonlinearQuantifier { .. }));
        // nonlinear in a free variable only is fine
        assert!(fm_eliminate(&f("exists x (x < a^2)")).unwrap().is_true_literal());
    }

    #[test]
    fn clause_solution_satisfies_clause() {
        let clauses = dnf(&f("x + y < 3 & x > 1 & y >= 1/2 & x - y = 1/4")).unwrap();
        let vars = [VarId::named("x"), VarId::named("y")];
        let sol = solve_clause(&clauses[0], &vars).unwrap().unwrap();
        let val = |v: &VarId| sol.get(v).cloned();
        assert!(clauses[0].iter().all(|l| l.holds_at(&val) == Some(true)));
    }

    pub(crate) fn eval_qf(g: &Formula, val: &dyn Fn(&VarId) -> Option<Rational>) -> bool {
        match g {
            Formula::Atom(a) => {
                let c = a.poly.eval(val).unwrap();
                a.cmp.holds(c.cmp(&Rational::zero()))
            }
            Formula::Not(h) => !eval_qf(h, val),
            Formula::And(a, b) => eval_qf(a, val) && eval_qf(b, val),
            Formula::Or(a, b) => eval_qf(a, val) || eval_qf(b, val),
            Formula::Imp(a, b) => !eval_qf(a, val) || eval_qf(b, val),
            Formula::Equiv(a, b) => eval_qf(a, val) == eval_qf(b, val),
            other => panic!("not quantifier-free: {other}"),
        }
    }
}

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fm::{dnf, fm_eliminate, solve_clause, QeError};
use super::univariate::{isolate_product_roots, pieces_from_roots, IsolatedRoot, UPoly};
use super::{fmt_rational, ratio, Poly};
use crate::syntax::{free_vars, Formula, VarId};
use crate::Rational;

/// Outcome of an arithmetic validity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Proved; the certificate lists the decision steps.
    Valid(Vec<String>),
    /// Refuted at the given point.
    Falsified(BTreeMap<VarId, Rational>),
    Unknown(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self, Verdict::Falsified(_))
    }

    pub fn describe(&self) -> String {
        match self {
            Verdict::Valid(_) => "valid".into(),
            Verdict::Falsified(w) => format!("falsified at {}", format_witness(w)),
            Verdict::Unknown(r) => format!("unknown: {r}"),
        }
    }
}

pub fn format_witness(w: &BTreeMap<VarId, Rational>) -> String {
    let parts: Vec<String> = w.iter().map(|(v, q)| format!("{v} = {}", fmt_rational(q))).collect();
    if parts.is_empty() {
        "the empty state".into()
    } else {
        parts.join(", ")
    }
}

const GRID: [(i64, i64); 7] = [(-2, 1), (-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1), (2, 1)];
const RANDOM_POINTS: usize = 200;
const GRID_LIMIT: usize = 20_000;

/// Decides validity of a first-order formula: exactly by Fourier–Motzkin in the
/// linear fragment and by root isolation for univariate quantifier-free formulas;
/// otherwise searches for a counterexample.
pub fn check_validity(f: &Formula) -> Verdict {
    if !f.is_first_order() {
        return Verdict::Unknown("formula contains modalities".into());
    }
    let fv: Vec<VarId> = free_vars(f).into_iter().collect();
    match fm_eliminate(f) {
        Ok(qf) => {
            if qf.atoms().iter().all(|a| a.poly.is_linear()) {
                return decide_linear(&qf, &fv);
            }
            if fv.len() == 1 {
                return decide_univariate(&qf, &fv[0]);
            }
            search(&qf, &fv, "nonlinear arithmetic outside the decision fragment")
        }
        Err(QeError::NonlinearQuantifier { var, atom }) => {
            if f.is_quantifier_free() {
                unreachable!("quantifier-free formulas never fail elimination")
            }
            Verdict::Unknown(format!("quantified variable `{var}` occurs nonlinearly in `{atom}`"))
        }
        Err(e) => Verdict::Unknown(e.to_string()),
    }
}

fn decide_linear(qf: &Formula, fv: &[VarId]) -> Verdict {
    let mut cert = vec![format!("quantifier-free form: {qf}")];
    let negated = Formula::not(qf.clone());
    let clauses = match dnf(&negated) {
        Ok(c) => c,
        Err(e) => return Verdict::Unknown(e.to_string()),
    };
    cert.push(format!("negation has {} clause(s)", clauses.len()));
    for (i, c) in clauses.iter().enumerate() {
        match solve_clause(c, fv) {
            Ok(Some(sol)) => {
                let full: BTreeMap<VarId, Rational> =
                    fv.iter().map(|v| (v.clone(), sol.get(v).cloned().unwrap_or_else(Rational::zero))).collect();
                return Verdict::Falsified(full);
            }
            Ok(None) => cert.push(format!("clause {i}: Fourier-Motzkin elimination of {} yields a false constant", list(fv))),
            Err(e) => return Verdict::Unknown(e.to_string()),
        }
    }
    cert.push("every clause of the negation is infeasible".into());
    Verdict::Valid(cert)
}

fn list(vs: &[VarId]) -> String {
    if vs.is_empty() {
        return "no variables".into();
    }
    vs.iter().map(VarId::to_string).collect::<Vec<_>>().join(", ")
}

fn decide_univariate(qf: &Formula, x: &VarId) -> Verdict {
    let polys: Vec<UPoly> = qf.atoms().iter().filter_map(|a| a.poly.to_upoly(x)).filter(|p| p.degree() > 0).collect();
    let product = polys.iter().fold(UPoly::constant(Rational::from_integer(1.into())), |acc, p| acc.mul(p));
    let bound = polys.iter().map(UPoly::cauchy_bound).max().unwrap_or_else(|| Rational::from_integer(1.into()));
    let lo = -&bound;
    let iso = match isolate_product_roots(&polys, &lo, &bound) {
        Ok(i) => i,
        Err(e) => return Verdict::Unknown(e.to_string()),
    };
    let pieces = pieces_from_roots(&product, &lo, &bound, &iso.roots);
    let mut samples: Vec<Rational> = vec![&lo - Rational::from_integer(1.into()), &bound + Rational::from_integer(1.into())];
    let mut irrational_roots = Vec::new();
    for p in &pieces {
        if p.is_point() {
            match &p.from {
                IsolatedRoot::Exact(q) => samples.push(q.clone()),
                r @ IsolatedRoot::Interval { .. } => irrational_roots.push(r.clone()),
            }
        } else {
            samples.push((p.from.upper() + p.to.lower()) / Rational::from_integer(2.into()));
        }
    }
    for s in &samples {
        let val = |_: &VarId| Some(s.clone());
        if !eval_qf(qf, &val) {
            return Verdict::Falsified(BTreeMap::from([(x.clone(), s.clone())]));
        }
    }
    if !irrational_roots.is_empty() {
        // truth at an irrational root: evaluate every atom's sign there exactly
        let mut iso = iso;
        for (i, r) in iso.roots.clone().iter().enumerate() {
            if r.exact().is_some() {
                continue;
            }
            let ok = eval_with_signs(qf, &mut |p: &Poly| {
                let up = p.to_upoly(x).expect("univariate");
                iso.sign_of_at(&up, i)
            });
            if !ok {
                return Verdict::Unknown(format!("fails only at an irrational root near {x} = {:.6}", r.approx()));
            }
        }
    }
    Verdict::Valid(vec![
        format!("quantifier-free univariate form in {x}: {qf}"),
        format!(
            "sign-invariant cells over [{}, {}] via Sturm sequences: {}",
            fmt_rational(&lo),
            fmt_rational(&bound),
            pieces.len() + 2
        ),
        "formula holds on every cell".into(),
    ])
}

fn eval_with_signs(f: &Formula, sign: &mut dyn FnMut(&Poly) -> super::Sign) -> bool {
    use super::Sign;
    match f {
        Formula::Atom(a) => {
            let ord = match sign(&a.poly) {
                Sign::Neg => std::cmp::Ordering::Less,
                Sign::Zero => std::cmp::Ordering::Equal,
                Sign::Pos => std::cmp::Ordering::Greater,
            };
            a.cmp.holds(ord)
        }
        Formula::Not(g) => !eval_with_signs(g, sign),
        Formula::And(a, b) => eval_with_signs(a, sign) && eval_with_signs(b, sign),
        Formula::Or(a, b) => eval_with_signs(a, sign) || eval_with_signs(b, sign),
        Formula::Imp(a, b) => !eval_with_signs(a, sign) || eval_with_signs(b, sign),
        Formula::Equiv(a, b) => eval_with_signs(a, sign) == eval_with_signs(b, sign),
        other => panic!("not quantifier-free: {other}"),
    }
}

/// Exact truth value of a quantifier-free formula at a point.
pub fn eval_qf(f: &Formula, val: &dyn Fn(&VarId) -> Option<Rational>) -> bool {
    match f {
        Formula::Atom(a) => {
            let c = a.poly.eval(val).expect("every variable valued");
            a.cmp.holds(c.cmp(&Rational::zero()))
        }
        Formula::Not(g) => !eval_qf(g, val),
        Formula::And(a, b) => eval_qf(a, val) && eval_qf(b, val),
        Formula::Or(a, b) => eval_qf(a, val) || eval_qf(b, val),
        Formula::Imp(a, b) => !eval_qf(a, val) || eval_qf(b, val),
        Formula::Equiv(a, b) => eval_qf(a, val) == eval_qf(b, val),
        other => panic!("not quantifier-free: {other}"),
    }
}

fn search(qf: &Formula, fv: &[VarId], reason: &str) -> Verdict {
    let try_point = |point: &BTreeMap<VarId, Rational>| {
        let val = |v: &VarId| point.get(v).cloned();
        !eval_qf(qf, &val)
    };
    let n = fv.len();
    if GRID.len().checked_pow(n as u32).is_some_and(|size| size <= GRID_LIMIT) {
        let mut idx = vec![0usize; n];
        loop {
            let point: BTreeMap<VarId, Rational> =
                fv.iter().zip(&idx).map(|(v, &i)| (v.clone(), ratio(GRID[i].0, GRID[i].1))).collect();
            if try_point(&point) {
                return Verdict::Falsified(point);
            }
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < GRID.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..RANDOM_POINTS {
        let point: BTreeMap<VarId, Rational> =
            fv.iter().map(|v| (v.clone(), ratio(rng.gen_range(-40..=40), rng.gen_range(1..=8)))).collect();
        if try_point(&point) {
            return Verdict::Falsified(point);
        }
    }
    Verdict::Unknown(reason.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_state_formula;

    fn f(s: &str) -> Formula {
        parse_state_formula(s).unwrap()
    }

    #[test]
    fn train_arithmetic_goal_is_valid() {
        assert!(check_validity(&f("v0 <= 100 & v0 < 100 -> v0 <= 100")).is_valid());
        assert!(check_validity(&f("a = 0 & v = 0 -> v <= 100")).is_valid());
    }

    #[test]
    fn trivial_equation_is_valid() {
        assert!(check_validity(&f("0 = 0")).is_valid());
    }

    #[test]
    fn nonlinear_counterexample_on_grid() {
        let v = check_validity(&f("x^2 >= x"));
        assert_eq!(v, Verdict::Falsified(BTreeMap::from([(VarId::named("x"), ratio(1, 2))])));
        // witness really falsifies
        assert!(!eval_qf(&f("x^2 >= x"), &|_| Some(ratio(1, 2))));
    }

    #[test]
    fn linear_counterexample_is_checked() {
        let g = f("x + y < 3 | x <= 1");
        let Verdict::Falsified(w) = check_validity(&g) else { panic!() };
        assert!(!eval_qf(&g, &|v| w.get(v).cloned()));
    }

    #[test]
    fn univariate_nonlinear_is_decided() {
        assert!(check_validity(&f("x^2 + 1 > 0")).is_valid());
        assert!(check_validity(&f("x^2 - 2*x + 1 >= 0")).is_valid());
        assert!(matches!(check_validity(&f("x^2 != 2")), Verdict::Unknown(_)));
    }

    #[test]
    fn quantified_linear_goal() {
        let g =
            f("v0 <= 100 -> forall t (t > 0 -> (forall s (0 <= s & s <= t -> 0 <= v0 + s & v0 + s <= 100)) -> t + v0 <= 100)");
        assert!(check_validity(&g).is_valid());
    }

    #[test]
    fn nonlinear_multivariate_unknown_when_true() {
        assert!(matches!(check_validity(&f("x^2 + y^2 >= 0")), Verdict::Unknown(_)));
    }
}

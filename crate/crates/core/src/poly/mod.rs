//! Exact multivariate polynomials over the rationals and the arithmetic
//! decision machinery built on top of them.

mod closure;
mod fm;
mod normal;
mod univariate;
mod validity;

pub use closure::{closure, closure_exact, relaxed_closure, ClosureResult};
pub use fm::{fm_eliminate, fm_eliminate_var, oriented, simplify, QeError};
pub use normal::{g_transform, to_normal_form, NfAtom, NfRel, NormalForm};
pub(crate) use univariate::pieces_from_roots;
pub use univariate::{
    isolate_product_roots, isolate_roots, sign_partition, IsolatedRoot, RootError, RootIsolation, Sign, SignPiece, UPoly,
};
pub use validity::{check_validity, eval_qf, format_witness, Verdict};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::syntax::VarId;
use crate::Rational;

/// Product of variables with positive exponents, sorted by variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(x: &VarId) -> Self {
        Monomial(vec![(x.clone(), 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, x: &VarId) -> u32 {
        self.0.iter().find(|(v, _)| v == x).map_or(0, |(_, e)| *e)
    }

    /// Splits off the power of `x`: `self = x^k * rest`.
    pub fn split(&self, x: &VarId) -> (u32, Monomial) {
        let k = self.degree_in(x);
        let rest = self.0.iter().filter(|(v, _)| v != x).cloned().collect();
        (k, Monomial(rest))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<VarId, u32> = self.0.iter().cloned().collect();
        for (v, e) in &other.0 {
            *map.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }

    /// Display order: higher degree first, then higher powers of
    /// alphabetically earlier variables first.
    fn display_cmp(&self, other: &Monomial) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| {
            let vars: BTreeSet<&VarId> = self.0.iter().chain(&other.0).map(|(v, _)| v).collect();
            for v in vars {
                let c = other.degree_in(v).cmp(&self.degree_in(v));
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial: monomial to nonzero rational coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `3`, `-1/2`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), q);
        p
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(rat(n))
    }

    pub fn var(x: &VarId) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(x), Rational::one());
        p
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value of a constant polynomial.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| v.clone())).collect()
    }

    pub fn contains_var(&self, x: &VarId) -> bool {
        self.terms.keys().any(|m| m.degree_in(x) > 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, x: &VarId) -> u32 {
        self.terms.keys().map(|m| m.degree_in(x)).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.total_degree() <= 1
    }

    /// Coefficients `[a_0, ..., a_n]` with `self = Σ a_i x^i` and each `a_i` free of `x`.
    pub fn coefficients_in(&self, x: &VarId) -> Vec<Poly> {
        let n = self.degree_in(x) as usize;
        let mut out = vec![Poly::zero(); n + 1];
        for (m, c) in &self.terms {
            let (k, rest) = m.split(x);
            out[k as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coefficients(x: &VarId, coeffs: &[Poly]) -> Poly {
        let mut acc = Poly::zero();
        let xp = Poly::var(x);
        for c in coeffs.iter().rev() {
            acc = &(&acc * &xp) + c;
        }
        acc
    }

    pub fn scale(&self, q: &Rational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `self[e/x]`.
    pub fn substitute(&self, x: &VarId, e: &Poly) -> Poly {
        if !self.contains_var(x) {
            return self.clone();
        }
        let coeffs = self.coefficients_in(x);
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * e) + c;
        }
        acc
    }

    /// Simultaneous substitution.
    pub fn substitute_all(&self, map: &BTreeMap<VarId, Poly>) -> Poly {
        let mut acc = Poly::zero();
        let mut powers: BTreeMap<(VarId, u32), Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (v, e) in &m.0 {
                match map.get(v) {
                    Some(p) => {
                        let pw = powers.entry((v.clone(), *e)).or_insert_with(|| p.pow(*e)).clone();
                        term = &term * &pw;
                    }
                    None => term = &term * &Poly::monomial(Monomial(vec![(v.clone(), *e)]), Rational::one()),
                }
            }
            acc = &acc + &term;
        }
        acc
    }

    pub fn derivative(&self, x: &VarId) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let k = m.degree_in(x);
            if k == 0 {
                continue;
            }
            let factors =
                m.0.iter()
                    .filter_map(|(v, e)| if v == x { (*e > 1).then(|| (v.clone(), e - 1)) } else { Some((v.clone(), *e)) })
                    .collect();
            out.add_term(Monomial(factors), c * rat(k as i64));
        }
        out
    }

    /// Exact evaluation; `None` if some variable has no value.
    pub fn eval(&self, val: &dyn Fn(&VarId) -> Option<Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.0 {
                let x = val(v)?;
                t *= num_traits::pow(x, *e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, val: &dyn Fn(&VarId) -> Option<f64>) -> Option<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (v, e) in &m.0 {
                t *= val(v)?.powi(*e as i32);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Univariate view when `t` is the only variable.
    pub fn to_upoly(&self, t: &VarId) -> Option<UPoly> {
        let coeffs = self.coefficients_in(t);
        let cs: Option<Vec<Rational>> = coeffs.iter().map(Poly::as_constant).collect();
        cs.map(UPoly::new)
    }

    pub fn from_upoly(p: &UPoly, t: &VarId) -> Poly {
        let coeffs: Vec<Poly> = p.coeffs().iter().map(|c| Poly::constant(c.clone())).collect();
        Poly::from_coefficients(t, &coeffs)
    }

    /// Terms in printing order.
    pub fn display_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.display_cmp(b.0));
        v
    }

    /// Coefficient of the first term in printing order.
    pub fn leading_coefficient(&self) -> Rational {
        self.display_terms().first().map(|(_, c)| (*c).clone()).unwrap_or_else(Rational::zero)
    }

    /// Scales by a positive factor so the leading coefficient is ±1 and
    /// every coefficient stays exact. Returns the scaled polynomial.
    pub fn normalized(&self) -> Poly {
        let lc = self.leading_coefficient();
        if lc.is_zero() {
            return self.clone();
        }
        self.scale(&(Rational::one() / lc.abs()))
    }

    /// Coefficient of `x` in a polynomial of degree at most one in `x`,
    /// together with the rest: `self = c*x + rest`.
    pub fn linear_split(&self, x: &VarId) -> Option<(Poly, Poly)> {
        let cs = self.coefficients_in(x);
        match cs.len() {
            1 => Some((Poly::zero(), cs[0].clone())),
            2 => Some((cs[1].clone(), cs[0].clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.display_terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            if m.is_one() {
                f.write_str(&fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly { (&self).$method(&rhs) }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly { (&self).$method(rhs) }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly { self.$method(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

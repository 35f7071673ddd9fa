use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{fmt_rational, rat, rational_to_f64};
use crate::Rational;

/// Dense univariate polynomial; `coeffs[i]` multiplies `t^i`. No trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UPoly {
    coeffs: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(q: &Rational) -> Sign {
        if q.is_zero() {
            Sign::Zero
        } else if q.is_positive() {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Neg => "-",
            Sign::Zero => "0",
            Sign::Pos => "+",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RootError {
    #[error("root isolation of the zero polynomial")]
    ZeroPolynomial,
    #[error("empty query interval")]
    EmptyInterval,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        UPoly::new(cs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        UPoly::new(vec![c])
    }

    /// `t - r`.
    pub fn linear_root(r: &Rational) -> Self {
        UPoly::new(vec![-r.clone(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has degree 0 here.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    pub fn sign_at(&self, x: &Rational) -> Sign {
        Sign::of(&self.eval(x))
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * rat(i as i64)).collect())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Rational::zero();
        UPoly::new((0..n).map(|i| self.coeffs.get(i).unwrap_or(&z) - other.coeffs.get(i).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn scale(&self, q: &Rational) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| c * q).collect())
    }

    /// Euclidean division; panics on division by zero.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dn = d.coeffs.len() - 1;
        let lead = d.lead();
        if rem.len() < d.coeffs.len() {
            return (UPoly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dn];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dn] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dn);
        (UPoly::new(quot), UPoly::new(rem))
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rational::one() / self.lead()))
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors, made monic.
    pub fn squarefree(&self) -> UPoly {
        if self.degree() == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Upper bound on the absolute value of every real root.
    pub fn cauchy_bound(&self) -> Rational {
        let lead = self.lead().abs();
        let max = self.coeffs[..self.coeffs.len().saturating_sub(1)]
            .iter()
            .map(|c| c.abs() / &lead)
            .fold(Rational::zero(), |m, c| if c > m { c } else { m });
        max + Rational::one()
    }

    fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            seq.push(r);
        }
        seq.pop();
        seq
    }

    /// Exact rational roots of a nonzero polynomial, when its integer form is small enough
    /// for divisor enumeration.
    fn rational_roots(&self) -> Vec<Rational> {
        let mut roots = Vec::new();
        let mut p = self.clone();
        if p.degree() == 0 {
            return roots;
        }
        if p.coeffs[0].is_zero() {
            roots.push(Rational::zero());
            while p.coeffs.first().is_some_and(Zero::is_zero) {
                p.coeffs.remove(0);
            }
        }
        if p.degree() == 0 {
            return roots;
        }
        let lcm = p.coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = p.coeffs.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let (Some(a0), Some(an)) = (ints[0].abs().to_u64(), ints.last().unwrap().abs().to_u64()) else {
            return roots;
        };
        const LIMIT: u64 = 1_000_000_000_000;
        if a0 > LIMIT || an > LIMIT {
            return roots;
        }
        let (d0, dn) = (divisors(a0), divisors(an));
        let mut cands: Vec<Rational> = Vec::new();
        for a in &d0 {
            for b in &dn {
                let q = Rational::new(BigInt::from(*a), BigInt::from(*b));
                cands.push(q.clone());
                cands.push(-q);
            }
        }
        cands.sort();
        cands.dedup();
        for c in cands {
            if p.eval(&c).is_zero() {
                roots.push(c);
            }
        }
        roots.sort();
        roots
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

fn variations(seq: &[UPoly], x: &Rational) -> usize {
    let signs: Vec<Sign> = seq.iter().map(|p| p.sign_at(x)).filter(|s| *s != Sign::Zero).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = crate::syntax::VarId::named("t");
        write!(f, "{}", super::Poly::from_upoly(self, &t))
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UPoly({self})")
    }
}

/// A single real root: known exactly, or inside an open interval that
/// contains no other root of the defining polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsolatedRoot {
    Exact(Rational),
    Interval { lo: Rational, hi: Rational },
}

impl IsolatedRoot {
    pub fn lower(&self) -> &Rational {
        match self {
            IsolatedRoot::Exact(q) => q,
            IsolatedRoot::Interval { lo, .. } => lo,
        }
    }

    pub fn upper(&self) -> &Rational {
        match self {
            IsolatedRoot::Exact(q) => q,
            IsolatedRoot::Interval { hi, .. } => hi,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            IsolatedRoot::Exact(q) => Some(q),
            IsolatedRoot::Interval { .. } => None,
        }
    }

    pub fn approx(&self) -> f64 {
        (rational_to_f64(self.lower()) + rational_to_f64(self.upper())) / 2.0
    }

    /// A rational point inside the isolating interval (the root itself when exact).
    pub fn sample(&self) -> Rational {
        (self.lower() + self.upper()) / rat(2)
    }
}

impl fmt::Display for IsolatedRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsolatedRoot::Exact(q) => f.write_str(&fmt_rational(q)),
            IsolatedRoot::Interval { lo, hi } => write!(f, "({}, {})", fmt_rational(lo), fmt_rational(hi)),
        }
    }
}

/// Isolated roots of a polynomial on a closed interval, sorted and disjoint.
#[derive(Debug, Clone)]
pub struct RootIsolation {
    /// Squarefree part of the input; every isolated root is a simple root of it.
    pub squarefree: UPoly,
    pub roots: Vec<IsolatedRoot>,
    sturm: Vec<UPoly>,
}

impl RootIsolation {
    fn count_half_open(&self, a: &Rational, b: &Rational) -> usize {
        variations(&self.sturm, a) - variations(&self.sturm, b)
    }

    /// Shrinks every inexact interval below `width`.
    pub fn refine(&mut self, width: &Rational) {
        let q = self.squarefree.clone();
        for r in &mut self.roots {
            refine_root(&q, r, width);
        }
    }

    /// Sign of `p` at the `i`-th root.
    pub fn sign_of_at(&mut self, p: &UPoly, i: usize) -> Sign {
        if p.is_zero() {
            return Sign::Zero;
        }
        match &self.roots[i] {
            IsolatedRoot::Exact(x) => p.sign_at(x),
            IsolatedRoot::Interval { .. } => {
                let g = self.squarefree.gcd(p);
                let (lo, hi) = (self.roots[i].lower().clone(), self.roots[i].upper().clone());
                if g.degree() > 0 && g.sign_at(&lo) != g.sign_at(&hi) {
                    return Sign::Zero;
                }
                let sp = p.squarefree();
                let seq = sp.sturm_sequence();
                loop {
                    let (lo, hi) = (self.roots[i].lower().clone(), self.roots[i].upper().clone());
                    let (sl, sh) = (sp.sign_at(&lo), sp.sign_at(&hi));
                    if sl != Sign::Zero && sl == sh && variations(&seq, &lo) == variations(&seq, &hi) {
                        return p.sign_at(&lo);
                    }
                    let w = (&hi - &lo) / rat(2);
                    let q = self.squarefree.clone();
                    refine_root(&q, &mut self.roots[i], &w);
                    if let IsolatedRoot::Exact(x) = &self.roots[i] {
                        return p.sign_at(x);
                    }
                }
            }
        }
    }
}

fn refine_root(q: &UPoly, r: &mut IsolatedRoot, width: &Rational) {
    loop {
        let (lo, hi) = match r {
            IsolatedRoot::Exact(_) => return,
            IsolatedRoot::Interval { lo, hi } => (lo.clone(), hi.clone()),
        };
        if &(&hi - &lo) < width {
            return;
        }
        let mid = (&lo + &hi) / rat(2);
        let sm = q.sign_at(&mid);
        if sm == Sign::Zero {
            *r = IsolatedRoot::Exact(mid);
            return;
        }
        if sm == q.sign_at(&lo) {
            *r = IsolatedRoot::Interval { lo: mid, hi };
        } else {
            *r = IsolatedRoot::Interval { lo, hi: mid };
        }
    }
}

/// All real roots of `p` in `[lo, hi]`, certified by a Sturm sequence.
pub fn isolate_roots(p: &UPoly, lo: &Rational, hi: &Rational) -> Result<RootIsolation, RootError> {
    isolate_product_roots(std::slice::from_ref(p), lo, hi)
}

/// Roots of the product of `factors`, with rational roots looked up factor
/// by factor, which is much cheaper than on the expanded product.
pub fn isolate_product_roots(factors: &[UPoly], lo: &Rational, hi: &Rational) -> Result<RootIsolation, RootError> {
    let p = factors.iter().fold(UPoly::constant(Rational::one()), |acc, f| acc.mul(f));
    if p.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    if lo > hi {
        return Err(RootError::EmptyInterval);
    }
    let q = p.squarefree();
    let mut iso = RootIsolation { sturm: q.sturm_sequence(), squarefree: q.clone(), roots: Vec::new() };
    if q.degree() == 0 {
        return Ok(iso);
    }
    let mut roots = Vec::new();
    if q.eval(lo).is_zero() {
        roots.push(IsolatedRoot::Exact(lo.clone()));
    }
    if lo < hi {
        isolate_half_open(&iso, lo.clone(), hi.clone(), &mut roots);
    }
    let rational: Vec<Rational> = factors.iter().flat_map(|f| f.squarefree().rational_roots()).collect();
    for r in &mut roots {
        if let IsolatedRoot::Interval { lo, hi } = r {
            if let Some(x) = rational.iter().find(|x| *x > lo && *x < hi) {
                *r = IsolatedRoot::Exact(x.clone());
            }
        }
    }
    roots.sort_by(|x, y| x.lower().cmp(y.lower()));
    iso.roots = roots;
    Ok(iso)
}

/// Roots in `(a, b]`. For a squarefree polynomial the Sturm count `V(a) - V(b)`
/// is exactly the number of roots in `(a, b]`, whether or not the ends are roots.
fn isolate_half_open(iso: &RootIsolation, a: Rational, b: Rational, out: &mut Vec<IsolatedRoot>) {
    let q = &iso.squarefree;
    let mut stack = vec![(a, b)];
    while let Some((a, b)) = stack.pop() {
        match iso.count_half_open(&a, &b) {
            0 => {}
            1 if q.eval(&b).is_zero() => out.push(IsolatedRoot::Exact(b)),
            1 if !q.eval(&a).is_zero() => out.push(IsolatedRoot::Interval { lo: a, hi: b }),
            _ => {
                let mid = (&a + &b) / rat(2);
                stack.push((a, mid.clone()));
                stack.push((mid, b));
            }
        }
    }
}

/// A maximal piece of `[lo, hi]` on which a polynomial has constant sign.
/// Point pieces have `from == to` and are closed at both ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPiece {
    pub from: IsolatedRoot,
    pub to: IsolatedRoot,
    pub from_closed: bool,
    pub to_closed: bool,
    pub sign: Sign,
}

impl SignPiece {
    pub fn is_point(&self) -> bool {
        self.from == self.to
    }

    /// Length bracket `[lower, upper]`; equal bounds when both ends are exact.
    pub fn length_bounds(&self) -> (Rational, Rational) {
        if self.is_point() {
            return (Rational::zero(), Rational::zero());
        }
        let lo = self.to.lower() - self.from.upper();
        let hi = self.to.upper() - self.from.lower();
        (if lo.is_negative() { Rational::zero() } else { lo }, hi)
    }
}

impl fmt::Display for SignPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}:{}", self.from, self.sign.symbol());
        }
        write!(
            f,
            "{}{}, {}{}:{}",
            if self.from_closed { "[" } else { "(" },
            self.from,
            self.to,
            if self.to_closed { "]" } else { ")" },
            self.sign.symbol()
        )
    }
}

/// Partition of `[lo, hi]` into sign-constant pieces of `p`.
pub fn sign_partition(p: &UPoly, lo: &Rational, hi: &Rational) -> Result<Vec<SignPiece>, RootError> {
    if lo > hi {
        return Err(RootError::EmptyInterval);
    }
    let lo_b = IsolatedRoot::Exact(lo.clone());
    let hi_b = IsolatedRoot::Exact(hi.clone());
    if p.is_zero() {
        return Ok(vec![SignPiece { from: lo_b, to: hi_b, from_closed: true, to_closed: true, sign: Sign::Zero }]);
    }
    let iso = isolate_roots(p, lo, hi)?;
    Ok(pieces_from_roots(p, lo, hi, &iso.roots))
}

pub(crate) fn pieces_from_roots(p: &UPoly, lo: &Rational, hi: &Rational, roots: &[IsolatedRoot]) -> Vec<SignPiece> {
    let mut out = Vec::new();
    let mut prev = IsolatedRoot::Exact(lo.clone());
    let mut prev_closed = true;
    for r in roots {
        if r.exact() == Some(lo) {
            out.push(SignPiece { from: r.clone(), to: r.clone(), from_closed: true, to_closed: true, sign: Sign::Zero });
            prev = r.clone();
            prev_closed = false;
            continue;
        }
        let sample = (prev.upper() + r.lower()) / rat(2);
        out.push(SignPiece {
            from: prev.clone(),
            to: r.clone(),
            from_closed: prev_closed,
            to_closed: false,
            sign: p.sign_at(&sample),
        });
        out.push(SignPiece { from: r.clone(), to: r.clone(), from_closed: true, to_closed: true, sign: Sign::Zero });
        prev = r.clone();
        prev_closed = false;
    }
    let end = IsolatedRoot::Exact(hi.clone());
    if prev != end {
        let sample = (prev.upper() + hi) / rat(2);
        out.push(SignPiece { from: prev, to: end, from_closed: prev_closed, to_closed: true, sign: p.sign_at(&sample) });
    } else if out.is_empty() {
        out.push(SignPiece { from: end.clone(), to: end, from_closed: true, to_closed: true, sign: p.sign_at(hi) });
    }
    out
}

use std::cmp::Ordering;

use num_traits::One;

use super::trace::Flow;
use super::SimError;
use crate::poly::{isolate_product_roots, pieces_from_roots, rat, IsolatedRoot, Poly, RootIsolation, Sign, UPoly};
use crate::syntax::Formula;
use crate::Rational;

/// The atoms of a quantifier-free formula as polynomials in one variable.
pub(crate) struct AtomTable {
    atoms: Vec<Poly>,
    pub upolys: Vec<UPoly>,
}

impl AtomTable {
    pub fn new(f: &Formula, to_upoly: &mut dyn FnMut(&Poly) -> Result<UPoly, SimError>) -> Result<AtomTable, SimError> {
        let mut atoms: Vec<Poly> = Vec::new();
        let mut upolys = Vec::new();
        for a in f.atoms() {
            if !atoms.contains(&a.poly) {
                upolys.push(to_upoly(&a.poly)?);
                atoms.push(a.poly.clone());
            }
        }
        Ok(AtomTable { atoms, upolys })
    }

    pub fn along(f: &Formula, flow: &Flow) -> Result<AtomTable, SimError> {
        AtomTable::new(f, &mut |p| flow.along(p))
    }

    /// Truth of `f` given the sign of each atom, in table order.
    pub fn eval(&self, f: &Formula, signs: &[Sign]) -> bool {
        eval_signs(f, &mut |p| {
            let i = self.atoms.iter().position(|q| q == p).expect("atom in table");
            signs[i]
        })
    }
}

pub(crate) fn eval_signs(f: &Formula, sign: &mut dyn FnMut(&Poly) -> Sign) -> bool {
    match f {
        Formula::Atom(a) => {
            let ord = match sign(&a.poly) {
                Sign::Neg => Ordering::Less,
                Sign::Zero => Ordering::Equal,
                Sign::Pos => Ordering::Greater,
            };
            a.cmp.holds(ord)
        }
        Formula::Not(g) => !eval_signs(g, sign),
        Formula::And(a, b) => eval_signs(a, sign) && eval_signs(b, sign),
        Formula::Or(a, b) => eval_signs(a, sign) || eval_signs(b, sign),
        Formula::Imp(a, b) => !eval_signs(a, sign) || eval_signs(b, sign),
        Formula::Equiv(a, b) => eval_signs(a, sign) == eval_signs(b, sign),
        other => panic!("not quantifier-free: {other}"),
    }
}

/// A sign-invariant piece of an interval for a family of polynomials.
#[derive(Debug, Clone)]
pub(crate) struct Cell {
    pub from: IsolatedRoot,
    pub to: IsolatedRoot,
    pub from_closed: bool,
    pub to_closed: bool,
    pub point: bool,
    pub signs: Vec<Sign>,
}

impl Cell {
    pub fn length_bounds(&self) -> (Rational, Rational) {
        if self.point {
            return (Rational::from_integer(0.into()), Rational::from_integer(0.into()));
        }
        let lo = self.to.lower() - self.from.upper();
        let hi = self.to.upper() - self.from.lower();
        (lo.max(Rational::from_integer(0.into())), hi)
    }

    pub fn is_exact(&self) -> bool {
        self.from.exact().is_some() && self.to.exact().is_some()
    }
}

/// Ordered sign-invariant cells of `[lo, hi]` for all of `polys`.
pub(crate) fn cells(polys: &[UPoly], lo: &Rational, hi: &Rational) -> Result<Vec<Cell>, SimError> {
    let product = polys.iter().filter(|p| p.degree() > 0).fold(UPoly::constant(Rational::one()), |acc, p| acc.mul(p));
    let signs_at = |x: &Rational| polys.iter().map(|p| p.sign_at(x)).collect::<Vec<_>>();
    if product.degree() == 0 || lo == hi {
        let mid = (lo + hi) / rat(2);
        return Ok(vec![Cell {
            from: IsolatedRoot::Exact(lo.clone()),
            to: IsolatedRoot::Exact(hi.clone()),
            from_closed: true,
            to_closed: true,
            point: lo == hi,
            signs: signs_at(&mid),
        }]);
    }
    let factors: Vec<UPoly> = polys.iter().filter(|p| p.degree() > 0).cloned().collect();
    let mut iso = isolate_product_roots(&factors, lo, hi)?;
    separate(&mut iso, lo, hi);
    let pieces = pieces_from_roots(&product, lo, hi, &iso.roots);
    let indexed: Vec<(usize, Option<usize>)> = pieces
        .iter()
        .enumerate()
        .map(|(k, p)| (k, if p.is_point() { iso.roots.iter().position(|r| r == &p.from) } else { None }))
        .collect();
    let mut out = Vec::with_capacity(pieces.len());
    for (k, root) in indexed {
        let p = &pieces[k];
        let signs = if p.is_point() {
            match (p.from.exact(), root) {
                (Some(x), _) => signs_at(x),
                (None, Some(i)) => polys.iter().map(|q| iso.sign_of_at(q, i)).collect(),
                (None, None) => unreachable!("point pieces are roots"),
            }
        } else {
            signs_at(&((p.from.upper() + p.to.lower()) / rat(2)))
        };
        out.push(Cell {
            from: p.from.clone(),
            to: p.to.clone(),
            from_closed: p.from_closed,
            to_closed: p.to_closed,
            point: p.is_point(),
            signs,
        });
    }
    Ok(out)
}

/// Refines isolating intervals until neighbouring roots, and the roots and
/// the ends of `[lo, hi]`, are strictly apart, so every open cell has a
/// positive certified length.
fn separate(iso: &mut RootIsolation, lo: &Rational, hi: &Rational) {
    loop {
        let mut ends: Vec<(Rational, Rational)> = vec![(lo.clone(), lo.clone())];
        ends.extend(iso.roots.iter().map(|r| (r.lower().clone(), r.upper().clone())));
        ends.push((hi.clone(), hi.clone()));
        let apart = ends.windows(2).all(|w| w[0] == w[1] || w[0].1 < w[1].0);
        let widest = iso.roots.iter().filter(|r| r.exact().is_none()).map(|r| r.upper() - r.lower()).max();
        match widest {
            Some(w) if !apart => iso.refine(&(w / rat(2))),
            _ => return,
        }
    }
}

/// Sign of `p(ε)` for all sufficiently small `ε > 0`.
pub(crate) fn sign_near_zero(p: &UPoly) -> Sign {
    p.coeffs().iter().map(Sign::of).find(|s| *s != Sign::Zero).unwrap_or(Sign::Zero)
}

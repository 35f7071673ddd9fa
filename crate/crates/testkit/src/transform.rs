//! The almost-everywhere transform, checked exhaustively on the sign-invariant
//! pieces of `[0, ∞)`.

use num_traits::{One, Zero};
use pdtl_core::poly::{g_transform, isolate_roots, rat, NfRel, NormalForm, Poly, Sign, UPoly};
use pdtl_core::syntax::{substitute, Formula};
use pdtl_core::Rational;

use crate::gen::{parameter, time};

pub fn to_formula(nf: &NormalForm) -> Formula {
    match nf {
        NormalForm::Atom(a) => a.to_formula(),
        NormalForm::And(a, b) => Formula::and(to_formula(a), to_formula(b)),
        NormalForm::Or(a, b) => Formula::or(to_formula(a), to_formula(b)),
    }
}

/// Sum of the time-degrees of the strict atoms once the parameter is fixed.
fn strict_degrees(nf: &NormalForm, value: &Rational) -> usize {
    match nf {
        NormalForm::Atom(a) if a.rel == NfRel::Lt => {
            a.poly.substitute(&parameter(), &Poly::constant(value.clone())).degree_in(&time()) as usize
        }
        NormalForm::Atom(_) => 0,
        NormalForm::And(a, b) | NormalForm::Or(a, b) => strict_degrees(a, value) + strict_degrees(b, value),
    }
}

fn eval(f: &Formula, sign: &mut dyn FnMut(&UPoly) -> Sign) -> bool {
    match f {
        Formula::Atom(a) => {
            let s = sign(&a.poly.to_upoly(&time()).expect("univariate in time"));
            let ord = match s {
                Sign::Neg => std::cmp::Ordering::Less,
                Sign::Zero => std::cmp::Ordering::Equal,
                Sign::Pos => std::cmp::Ordering::Greater,
            };
            a.cmp.holds(ord)
        }
        Formula::Not(g) => !eval(g, sign),
        Formula::And(a, b) => eval(a, sign) && eval(b, sign),
        Formula::Or(a, b) => eval(a, sign) || eval(b, sign),
        Formula::Imp(a, b) => !eval(a, sign) || eval(b, sign),
        Formula::Equiv(a, b) => eval(a, sign) == eval(b, sign),
        other => panic!("unexpected {other}"),
    }
}

fn negate(s: Sign) -> Sign {
    match s {
        Sign::Neg => Sign::Pos,
        Sign::Zero => Sign::Zero,
        Sign::Pos => Sign::Neg,
    }
}

/// One sign-invariant piece of `[0, ∞)`: a root or the open gap after it.
enum Piece {
    Root(usize),
    Gap(Rational),
}

/// One row per piece in increasing time: whether it is a single point, and
/// the truth of both formulas there.
pub fn truth_table(pf: &Formula, qf: &Formula) -> Vec<(bool, (bool, bool))> {
    let polys: Vec<UPoly> = pf.atoms().iter().chain(qf.atoms().iter()).map(|a| a.poly.to_upoly(&time()).unwrap()).collect();
    let mut nonconst: Vec<UPoly> = Vec::new();
    for q in polys.iter().filter(|q| q.degree() > 0) {
        let m = q.monic();
        if !nonconst.contains(&m) {
            nonconst.push(m);
        }
    }
    let product = nonconst.iter().fold(UPoly::constant(Rational::one()), |acc, q| acc.mul(q)).squarefree();
    let hi = nonconst.iter().map(|q| q.cauchy_bound()).max().unwrap_or_else(Rational::zero) + rat(1);
    let mut iso = isolate_roots(&product, &Rational::zero(), &hi).unwrap();
    let n = iso.roots.len();
    let mut pieces = Vec::new();
    let starts_at_root = n > 0 && iso.roots[0].exact() == Some(&Rational::zero());
    if !starts_at_root {
        let first = if n > 0 { iso.roots[0].lower().clone() } else { hi.clone() };
        pieces.push(Piece::Gap(first / rat(2)));
    }
    for i in 0..n {
        pieces.push(Piece::Root(i));
        let next = if i + 1 < n { iso.roots[i + 1].lower().clone() } else { &hi + rat(1) };
        pieces.push(Piece::Gap((iso.roots[i].upper() + next) / rat(2)));
    }
    pieces
        .iter()
        .map(|piece| {
            let signs: Vec<Sign> = nonconst
                .iter()
                .map(|m| match piece {
                    Piece::Gap(x) => m.sign_at(x),
                    Piece::Root(i) => iso.sign_of_at(m, *i),
                })
                .collect();
            let mut sign = |q: &UPoly| {
                if q.degree() == 0 {
                    return Sign::of(&q.lead());
                }
                let k = nonconst.iter().position(|m| m == &q.monic()).expect("known factor");
                if q.lead() < Rational::zero() {
                    negate(signs[k])
                } else {
                    signs[k]
                }
            };
            let truth = (eval(pf, &mut sign), eval(qf, &mut sign));
            (matches!(piece, Piece::Root(_)), truth)
        })
        .collect()
}

/// Wherever the transform fails the original fails on a neighbourhood, and
/// the two differ at no more times than the strict atoms have roots.
pub fn check_transform(nf: &NormalForm, value: &Rational) -> Result<(), String> {
    let q = g_transform(nf, &time());
    let plug = |f: &Formula| substitute(f, &parameter(), &Poly::constant(value.clone())).unwrap();
    let pf = plug(&to_formula(nf));
    let qf = plug(&q);
    let table = truth_table(&pf, &qf);
    let mut differing_points = 0;
    for (k, &(is_point, (p_holds, q_holds))) in table.iter().enumerate() {
        if !q_holds {
            if p_holds {
                return Err(format!("Q fails but P holds at piece {k} of {pf} / {qf}"));
            }
            if is_point {
                if let Some(&(_, (true, _))) = table.get(k + 1) {
                    return Err(format!("P holds right after a point where Q fails: {pf} / {qf}"));
                }
                if k > 0 && table[k - 1].1 .0 {
                    return Err(format!("P holds right before a positive point where Q fails: {pf} / {qf}"));
                }
            }
        }
        if q_holds && !p_holds {
            if !is_point {
                return Err(format!("Q and not P on an interval: {pf} / {qf}"));
            }
            differing_points += 1;
        }
    }
    let bound = strict_degrees(nf, value);
    if differing_points > bound {
        return Err(format!("{differing_points} differing points, more than {bound}, for {pf} / {qf}"));
    }
    Ok(())
}

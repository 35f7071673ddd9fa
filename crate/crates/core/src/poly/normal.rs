use std::fmt;

use super::fm::{fm_eliminate, QeError};
use super::Poly;
use crate::syntax::{Cmp, Formula, VarId};

/// Relation of a normal-form atom `e rel 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NfRel {
    Eq,
    Ge,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NfAtom {
    pub poly: Poly,
    pub rel: NfRel,
}

impl NfAtom {
    pub fn to_formula(&self) -> Formula {
        let cmp = match self.rel {
            NfRel::Eq => Cmp::Eq,
            NfRel::Ge => Cmp::Ge,
            NfRel::Lt => Cmp::Lt,
        };
        Formula::atom(self.poly.clone(), cmp)
    }
}

/// Negation-free formula over `e = 0`, `e >= 0` and `e < 0` atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalForm {
    Atom(NfAtom),
    And(Box<NormalForm>, Box<NormalForm>),
    Or(Box<NormalForm>, Box<NormalForm>),
}

impl NormalForm {
    fn atom(poly: Poly, rel: NfRel) -> NormalForm {
        NormalForm::Atom(NfAtom { poly, rel })
    }

    fn and(a: NormalForm, b: NormalForm) -> NormalForm {
        NormalForm::And(Box::new(a), Box::new(b))
    }

    fn or(a: NormalForm, b: NormalForm) -> NormalForm {
        NormalForm::Or(Box::new(a), Box::new(b))
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            NormalForm::Atom(a) => a.to_formula(),
            NormalForm::And(a, b) => Formula::and(a.to_formula(), b.to_formula()),
            NormalForm::Or(a, b) => Formula::or(a.to_formula(), b.to_formula()),
        }
    }

    pub fn atoms(&self) -> Vec<&NfAtom> {
        match self {
            NormalForm::Atom(a) => vec![a],
            NormalForm::And(a, b) | NormalForm::Or(a, b) => {
                let mut v = a.atoms();
                v.extend(b.atoms());
                v
            }
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Equivalent formula over the `{= 0, >= 0, < 0}` basis. Quantified inputs are
/// first reduced by Fourier–Motzkin elimination.
pub fn to_normal_form(f: &Formula) -> Result<NormalForm, QeError> {
    if !f.is_first_order() {
        return Err(QeError::NotFirstOrder);
    }
    let qf = if f.is_quantifier_free() { f.clone() } else { fm_eliminate(f)? };
    Ok(from_nnf(&qf.nnf()))
}

fn from_nnf(f: &Formula) -> NormalForm {
    match f {
        Formula::Atom(a) => {
            let e = &a.poly;
            match a.cmp {
                Cmp::Eq => NormalForm::atom(e.clone(), NfRel::Eq),
                Cmp::Ne => NormalForm::or(NormalForm::atom(e.clone(), NfRel::Lt), NormalForm::atom(-e, NfRel::Lt)),
                Cmp::Lt => NormalForm::atom(e.clone(), NfRel::Lt),
                Cmp::Le => NormalForm::atom(-e, NfRel::Ge),
                Cmp::Gt => NormalForm::atom(-e, NfRel::Lt),
                Cmp::Ge => NormalForm::atom(e.clone(), NfRel::Ge),
            }
        }
        Formula::And(a, b) => NormalForm::and(from_nnf(a), from_nnf(b)),
        Formula::Or(a, b) => NormalForm::or(from_nnf(a), from_nnf(b)),
        other => unreachable!("not in negation normal form: {other}"),
    }
}

/// Replaces every strict atom `e < 0`, viewing `e` as a polynomial in `t` with
/// coefficients `a_n ... a_0`, by `e <= 0 & (a_n = 0 & ... & a_1 = 0 -> e < 0)`.
pub fn g_transform(p: &NormalForm, t: &VarId) -> Formula {
    match p {
        NormalForm::Atom(a) => match a.rel {
            NfRel::Eq | NfRel::Ge => a.to_formula(),
            NfRel::Lt => {
                let e = &a.poly;
                let coeffs = e.coefficients_in(t);
                let vanish = Formula::and_all(coeffs[1..].iter().rev().map(|c| Formula::atom(c.clone(), Cmp::Eq)));
                Formula::and(Formula::atom(e.clone(), Cmp::Le), Formula::imp(vanish, Formula::atom(e.clone(), Cmp::Lt)))
            }
        },
        NormalForm::And(a, b) => Formula::and(g_transform(a, t), g_transform(b, t)),
        NormalForm::Or(a, b) => Formula::or(g_transform(a, t), g_transform(b, t)),
    }
}

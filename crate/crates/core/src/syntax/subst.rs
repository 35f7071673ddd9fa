use std::collections::BTreeSet;

use super::ast::{Formula, OdeSystem, Program, Term};
use super::vars::{bound_vars, free_vars};
use super::VarId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("substituting for `{var}` would capture `{captured}` under its quantifier")]
    Capture { var: VarId, captured: VarId },
    #[error("cannot substitute for `{var}` inside a modality whose program writes {written}")]
    Inadmissible { var: VarId, written: String },
}

/// `φ[e/x]`, rejecting substitutions that capture or cross a program writing
/// `x` or a variable of `e`.
pub fn substitute(f: &Formula, x: &VarId, e: &Term) -> Result<Formula, SubstError> {
    let ev = e.vars();
    subst_formula(f, x, e, &ev)
}

fn subst_formula(f: &Formula, x: &VarId, e: &Term, ev: &BTreeSet<VarId>) -> Result<Formula, SubstError> {
    let s = |g: &Formula| subst_formula(g, x, e, ev);
    Ok(match f {
        Formula::Atom(a) => Formula::atom(a.poly.substitute(x, e), a.cmp),
        Formula::Not(g) => Formula::not(s(g)?),
        Formula::And(a, b) => Formula::and(s(a)?, s(b)?),
        Formula::Or(a, b) => Formula::or(s(a)?, s(b)?),
        Formula::Imp(a, b) => Formula::imp(s(a)?, s(b)?),
        Formula::Equiv(a, b) => Formula::equiv(s(a)?, s(b)?),
        Formula::Forall(y, g) | Formula::Exists(y, g) => {
            if y == x || !free_vars(g).contains(x) {
                return Ok(f.clone());
            }
            if ev.contains(y) {
                return Err(SubstError::Capture { var: x.clone(), captured: y.clone() });
            }
            let body = s(g)?;
            if matches!(f, Formula::Forall(..)) {
                Formula::forall(y.clone(), body)
            } else {
                Formula::exists(y.clone(), body)
            }
        }
        Formula::BoxOp(p, k) | Formula::DiamondOp(p, k) => {
            if !free_vars(f).contains(x) {
                return Ok(f.clone());
            }
            let bv = bound_vars(p);
            let clash: Vec<&VarId> = bv.iter().filter(|v| *v == x || ev.contains(*v)).collect();
            if !clash.is_empty() {
                let written = clash.iter().map(|v| format!("`{v}`")).collect::<Vec<_>>().join(", ");
                return Err(SubstError::Inadmissible { var: x.clone(), written });
            }
            let p2 = subst_program(p, x, e, ev)?;
            let k2 = match &**k {
                super::ast::TraceFormula::State(g) => super::ast::TraceFormula::State(s(g)?),
                super::ast::TraceFormula::Tae(g) => super::ast::TraceFormula::Tae(s(g)?),
            };
            if matches!(f, Formula::BoxOp(..)) {
                Formula::boxed(p2, k2)
            } else {
                Formula::diamond(p2, k2)
            }
        }
    })
}

/// Substitution into a program that does not write `x` or any variable of `e`.
fn subst_program(p: &Program, x: &VarId, e: &Term, ev: &BTreeSet<VarId>) -> Result<Program, SubstError> {
    let s = |q: &Program| subst_program(q, x, e, ev);
    Ok(match p {
        Program::Assign(y, t) => Program::Assign(y.clone(), t.substitute(x, e)),
        Program::Test(f) => Program::Test(subst_formula(f, x, e, ev)?),
        Program::Ode(o) => Program::Ode(OdeSystem::new(
            o.eqs.iter().map(|(y, t)| (y.clone(), t.substitute(x, e))).collect(),
            subst_formula(&o.domain, x, e, ev)?,
        )),
        Program::Choice(a, b) => Program::choice(s(a)?, s(b)?),
        Program::Seq(a, b) => Program::seq(s(a)?, s(b)?),
        Program::Loop(a) => Program::looped(s(a)?),
    })
}

/// Renames the free occurrences of `x` to the fresh variable `y` in a first-order formula.
pub fn rename_free(f: &Formula, x: &VarId, y: &VarId) -> Result<Formula, SubstError> {
    substitute(f, x, &Term::var(y))
}

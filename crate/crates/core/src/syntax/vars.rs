use std::collections::BTreeSet;

use super::ast::{Formula, Program, TraceFormula};
use super::VarId;

/// Free variables of a formula.
pub fn free_vars(f: &Formula) -> BTreeSet<VarId> {
    match f {
        Formula::Atom(a) => a.poly.vars(),
        Formula::Not(g) => free_vars(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Equiv(a, b) => {
            let mut s = free_vars(a);
            s.extend(free_vars(b));
            s
        }
        Formula::Forall(x, g) | Formula::Exists(x, g) => {
            let mut s = free_vars(g);
            s.remove(x);
            s
        }
        Formula::BoxOp(p, k) | Formula::DiamondOp(p, k) => {
            let mut s = program_free_vars(p);
            let post = free_vars(k.formula());
            match &**k {
                // a trace postcondition is also read in the initial state
                TraceFormula::Tae(_) => s.extend(post),
                TraceFormula::State(_) => {
                    let must = must_bound_vars(p);
                    s.extend(post.into_iter().filter(|v| !must.contains(v)));
                }
            }
            s
        }
    }
}

/// Variables whose initial value a program may read.
pub fn program_free_vars(p: &Program) -> BTreeSet<VarId> {
    match p {
        Program::Assign(_, e) => e.vars(),
        Program::Test(f) => free_vars(f),
        Program::Ode(o) => {
            let mut s: BTreeSet<VarId> = o.vars().cloned().collect();
            for (_, e) in &o.eqs {
                s.extend(e.vars());
            }
            s.extend(free_vars(&o.domain));
            s
        }
        Program::Choice(a, b) => {
            let mut s = program_free_vars(a);
            s.extend(program_free_vars(b));
            s
        }
        Program::Seq(a, b) => {
            let mut s = program_free_vars(a);
            let must = must_bound_vars(a);
            s.extend(program_free_vars(b).into_iter().filter(|v| !must.contains(v)));
            s
        }
        Program::Loop(a) => program_free_vars(a),
    }
}

/// Variables a program may write.
pub fn bound_vars(p: &Program) -> BTreeSet<VarId> {
    match p {
        Program::Assign(x, _) => BTreeSet::from([x.clone()]),
        Program::Test(_) => BTreeSet::new(),
        Program::Ode(o) => o.vars().cloned().collect(),
        Program::Choice(a, b) | Program::Seq(a, b) => {
            let mut s = bound_vars(a);
            s.extend(bound_vars(b));
            s
        }
        Program::Loop(a) => bound_vars(a),
    }
}

/// Variables written on every run of a program.
pub fn must_bound_vars(p: &Program) -> BTreeSet<VarId> {
    match p {
        Program::Assign(x, _) => BTreeSet::from([x.clone()]),
        Program::Test(_) => BTreeSet::new(),
        Program::Ode(o) => o.vars().cloned().collect(),
        Program::Choice(a, b) => must_bound_vars(a).intersection(&must_bound_vars(b)).cloned().collect(),
        Program::Seq(a, b) => {
            let mut s = must_bound_vars(a);
            s.extend(must_bound_vars(b));
            s
        }
        Program::Loop(_) => BTreeSet::new(),
    }
}

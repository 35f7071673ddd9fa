//! Axioms, used as equivalence rewrites at any position.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::registry::{ArgKind, Rule, RuleArg, RuleOutcome, RuleRegistry};
use super::{KernelError, Position, Sequent};
use crate::ode::{solve_polynomial_avoiding, PolySolution, DEFAULT_DEPTH};
use crate::poly::{closure_exact, fm_eliminate, g_transform, to_normal_form, Poly};
use crate::syntax::{substitute, Atom, Cmp, Formula, OdeSystem, Program, Term, TraceFormula, VarId};

/// Rewrites the left-hand side of an axiom into its right-hand side. The set
/// lists every variable of the enclosing sequent, for fresh-name generation.
type Rewrite = fn(&Formula, &BTreeSet<VarId>) -> Result<Formula, KernelError>;

pub struct Axiom {
    name: &'static str,
    summary: &'static str,
    rewrite: Rewrite,
}

impl Axiom {
    /// Left-to-right rewrite of `f`.
    pub fn forward(&self, f: &Formula, avoid: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
        (self.rewrite)(f, avoid)
    }
}

impl Rule for Axiom {
    fn name(&self) -> &'static str {
        self.name
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn arg_kind(&self) -> ArgKind {
        ArgKind::OptionalFormula
    }

    fn apply(&self, _: &RuleRegistry, goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
        let pos = pos.expect("checked by the registry");
        let here = goal.at(pos)?;
        let next = match arg {
            RuleArg::None => goal.replace(pos, self.forward(here, &goal.all_vars())?)?,
            RuleArg::Formula(lhs) => {
                let restored = goal.replace(pos, lhs.clone())?;
                let rhs = self.forward(lhs, &restored.all_vars())?;
                if &rhs != here {
                    return Err(KernelError::ShapeMismatch {
                        rule: self.name.into(),
                        expected: rhs.to_string(),
                        found: here.to_string(),
                    });
                }
                restored
            }
            _ => return Err(KernelError::BadArgument(format!("{} takes an optional formula", self.name))),
        };
        Ok(RuleOutcome::premises(vec![next]))
    }
}

fn mismatch(rule: &str, expected: &str, found: &Formula) -> KernelError {
    KernelError::ShapeMismatch { rule: rule.into(), expected: expected.into(), found: found.to_string() }
}

/// `[α] tae: φ`
fn tae_box(f: &Formula) -> Option<(&Program, &Formula)> {
    match f {
        Formula::BoxOp(p, k) => match &**k {
            TraceFormula::Tae(g) => Some((p, g)),
            TraceFormula::State(_) => None,
        },
        _ => None,
    }
}

/// `[α] φ` with a state postcondition.
fn state_box(f: &Formula) -> Option<(&Program, &Formula)> {
    match f {
        Formula::BoxOp(p, k) => match &**k {
            TraceFormula::State(g) => Some((p, g)),
            TraceFormula::Tae(_) => None,
        },
        _ => None,
    }
}

/// The closure of a first-order formula.
pub fn closure_of(f: &Formula) -> Result<Formula, KernelError> {
    if !f.is_first_order() {
        return Err(KernelError::ShapeMismatch {
            rule: "closure".into(),
            expected: "a first-order postcondition".into(),
            found: f.to_string(),
        });
    }
    Ok(closure_exact(f))
}

fn solve(sys: &OdeSystem, avoid: &BTreeSet<VarId>) -> Result<PolySolution, KernelError> {
    solve_polynomial_avoiding(sys, avoid, DEFAULT_DEPTH).map_err(KernelError::Ode)
}

/// `[x1 := e1][x2 := e2]...φ` for the simultaneous update `x_i := e_i`. Outer
/// assignments come first; an order exists when no later term reads an earlier
/// variable.
pub fn assignment_chain(update: &[(VarId, Term)], body: Formula) -> Result<Formula, KernelError> {
    let mut remaining: Vec<&(VarId, Term)> = update.iter().collect();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let pick =
            remaining.iter().position(|(x, _)| remaining.iter().all(|(y, e)| y == x || !e.contains_var(x))).ok_or_else(|| {
                KernelError::NoAssignmentOrder(update.iter().map(|(x, _)| x.to_string()).collect::<Vec<_>>().join(", "))
            })?;
        order.push(remaining.remove(pick));
    }
    Ok(order.into_iter().rev().fold(body, |acc, (x, e)| Formula::box_state(Program::assign(x.clone(), e.clone()), acc)))
}

fn solution_at(sys: &OdeSystem, sol: &PolySolution, time: &VarId) -> Vec<(VarId, Term)> {
    let at = sol.at_time(&Poly::var(time));
    sys.vars().map(|x| (x.clone(), at[x].clone())).collect()
}

fn map_atoms(f: &Formula, g: &dyn Fn(&Atom) -> Atom) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(g(a)),
        Formula::Not(a) => Formula::not(map_atoms(a, g)),
        Formula::And(a, b) => Formula::and(map_atoms(a, g), map_atoms(b, g)),
        Formula::Or(a, b) => Formula::or(map_atoms(a, g), map_atoms(b, g)),
        Formula::Imp(a, b) => Formula::imp(map_atoms(a, g), map_atoms(b, g)),
        Formula::Equiv(a, b) => Formula::equiv(map_atoms(a, g), map_atoms(b, g)),
        other => unreachable!("quantifier-free first-order formula expected, got {other}"),
    }
}

/// The formula `Q` with `forall t>=0 Q` equivalent to "for almost all t >= 0,
/// P holds along the solution".
pub fn almost_always(post: &Formula, sol: &PolySolution) -> Result<Formula, KernelError> {
    if !post.is_first_order() {
        return Err(mismatch("tae_solve", "a first-order postcondition", post));
    }
    let qf = if post.is_quantifier_free() { post.clone() } else { fm_eliminate(post).map_err(KernelError::Qe)? };
    let map: BTreeMap<VarId, Poly> = sol.as_map();
    let along = map_atoms(&qf, &|a| Atom::new(a.poly.substitute_all(&map), a.cmp));
    let nf = to_normal_form(&along).map_err(KernelError::Qe)?;
    Ok(g_transform(&nf, &sol.time))
}

fn cmp_var(x: &VarId, c: Cmp, n: i64) -> Formula {
    Formula::cmp(&Poly::var(x), c, &Poly::int(n))
}

/// `forall s (0 <= s & s <= t -> [x := y(s)] R)`
fn domain_until(sys: &OdeSystem, sol: &PolySolution, s: &VarId) -> Result<Formula, KernelError> {
    let range = Formula::and(cmp_var(s, Cmp::Ge, 0), Formula::cmp(&Poly::var(s), Cmp::Le, &Poly::var(&sol.time)));
    let body = assignment_chain(&solution_at(sys, sol, s), sys.domain.clone())?;
    Ok(Formula::forall(s.clone(), Formula::imp(range, body)))
}

fn fresh_s(sol: &PolySolution, avoid: &BTreeSet<VarId>) -> VarId {
    VarId::fresh("s", |v| avoid.contains(v) || v == &sol.time)
}

fn tae_test(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match tae_box(f) {
        Some((Program::Test(_), phi)) => closure_of(phi),
        _ => Err(mismatch("tae_test", "[?P] tae: φ", f)),
    }
}

fn tae_choice(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match tae_box(f) {
        Some((Program::Choice(a, b), phi)) => {
            Ok(Formula::and(Formula::box_tae((**a).clone(), phi.clone()), Formula::box_tae((**b).clone(), phi.clone())))
        }
        _ => Err(mismatch("tae_choice", "[α ++ β] tae: φ", f)),
    }
}

fn tae_assign(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match tae_box(f) {
        Some((p @ Program::Assign(..), phi)) => {
            let c = closure_of(phi)?;
            Ok(Formula::and(c.clone(), Formula::box_state(p.clone(), c)))
        }
        _ => Err(mismatch("tae_assign", "[x := e] tae: φ", f)),
    }
}

fn tae_seq(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match tae_box(f) {
        Some((Program::Seq(a, b), phi)) => Ok(Formula::and(
            Formula::box_tae((**a).clone(), phi.clone()),
            Formula::box_state((**a).clone(), Formula::box_tae((**b).clone(), phi.clone())),
        )),
        _ => Err(mismatch("tae_seq", "[α; β] tae: φ", f)),
    }
}

fn tae_loop(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match tae_box(f) {
        Some((p @ Program::Loop(a), phi)) => {
            let c = closure_of(phi)?;
            let step = Formula::imp(c.clone(), Formula::box_tae((**a).clone(), phi.clone()));
            Ok(Formula::and(c, Formula::box_state(p.clone(), step)))
        }
        _ => Err(mismatch("tae_loop", "[α*] tae: φ", f)),
    }
}

fn tae_solve(f: &Formula, avoid: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match tae_box(f) {
        Some((Program::Ode(sys), post)) if !sys.has_domain() => {
            let sol = solve(sys, avoid)?;
            let q = almost_always(post, &sol)?;
            let t = sol.time.clone();
            Ok(Formula::and(closure_of(post)?, Formula::forall(t.clone(), Formula::imp(cmp_var(&t, Cmp::Ge, 0), q))))
        }
        _ => Err(mismatch("tae_solve", "[{x' = f(x)}] tae: P without evolution domain", f)),
    }
}

fn tae_solve_dom(f: &Formula, avoid: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match tae_box(f) {
        Some((Program::Ode(sys), post)) => {
            let sol = solve(sys, avoid)?;
            let q = almost_always(post, &sol)?;
            let s = fresh_s(&sol, avoid);
            let t = sol.time.clone();
            let body = Formula::imp(domain_until(sys, &sol, &s)?, q);
            Ok(Formula::and(closure_of(post)?, Formula::forall(t.clone(), Formula::imp(cmp_var(&t, Cmp::Gt, 0), body))))
        }
        _ => Err(mismatch("tae_solve_dom", "[{x' = f(x) & R}] tae: P", f)),
    }
}

fn dl_assign(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match state_box(f) {
        Some((Program::Assign(x, e), phi)) => substitute(phi, x, e).map_err(KernelError::Subst),
        _ => Err(mismatch("dl_assign", "[x := e] φ", f)),
    }
}

fn dl_test(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match state_box(f) {
        Some((Program::Test(q), phi)) => Ok(Formula::imp(q.clone(), phi.clone())),
        _ => Err(mismatch("dl_test", "[?Q] φ", f)),
    }
}

fn dl_choice(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match state_box(f) {
        Some((Program::Choice(a, b), phi)) => {
            Ok(Formula::and(Formula::box_state((**a).clone(), phi.clone()), Formula::box_state((**b).clone(), phi.clone())))
        }
        _ => Err(mismatch("dl_choice", "[α ++ β] φ", f)),
    }
}

fn dl_seq(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match state_box(f) {
        Some((Program::Seq(a, b), phi)) => Ok(Formula::box_state((**a).clone(), Formula::box_state((**b).clone(), phi.clone()))),
        _ => Err(mismatch("dl_seq", "[α; β] φ", f)),
    }
}

fn dl_loop(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match state_box(f) {
        Some((p @ Program::Loop(a), phi)) => {
            Ok(Formula::and(phi.clone(), Formula::box_state((**a).clone(), Formula::box_state(p.clone(), phi.clone()))))
        }
        _ => Err(mismatch("dl_loop", "[α*] φ", f)),
    }
}

fn dl_solve(f: &Formula, avoid: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match state_box(f) {
        Some((Program::Ode(sys), phi)) if !sys.has_domain() => {
            let sol = solve(sys, avoid)?;
            let t = sol.time.clone();
            let end = assignment_chain(&solution_at(sys, &sol, &t), phi.clone())?;
            Ok(Formula::forall(t.clone(), Formula::imp(cmp_var(&t, Cmp::Ge, 0), end)))
        }
        _ => Err(mismatch("dl_solve", "[{x' = f(x)}] φ without evolution domain", f)),
    }
}

fn dl_solve_dom(f: &Formula, avoid: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match state_box(f) {
        Some((Program::Ode(sys), phi)) => {
            let sol = solve(sys, avoid)?;
            let s = fresh_s(&sol, avoid);
            let t = sol.time.clone();
            let end = assignment_chain(&solution_at(sys, &sol, &t), phi.clone())?;
            let body = Formula::imp(domain_until(sys, &sol, &s)?, end);
            Ok(Formula::forall(t.clone(), Formula::imp(cmp_var(&t, Cmp::Ge, 0), body)))
        }
        _ => Err(mismatch("dl_solve_dom", "[{x' = f(x) & R}] φ", f)),
    }
}

fn dl_diamond(f: &Formula, _: &BTreeSet<VarId>) -> Result<Formula, KernelError> {
    match f {
        Formula::DiamondOp(p, k) => match &**k {
            TraceFormula::State(phi) => Ok(Formula::not(Formula::box_state((**p).clone(), Formula::not(phi.clone())))),
            TraceFormula::Tae(_) => Err(mismatch("dl_diamond", "<α> φ with a state postcondition", f)),
        },
        _ => Err(mismatch("dl_diamond", "<α> φ", f)),
    }
}

pub(super) fn all() -> Vec<Arc<dyn Rule>> {
    let ax = |name, summary, rewrite| Arc::new(Axiom { name, summary, rewrite }) as Arc<dyn Rule>;
    vec![
        ax("tae_test", "[?P] tae: φ <-> cl(φ)", tae_test),
        ax("tae_choice", "[α ++ β] tae: φ <-> [α] tae: φ & [β] tae: φ", tae_choice),
        ax("tae_assign", "[x := e] tae: φ <-> cl(φ) & [x := e] cl(φ)", tae_assign),
        ax("tae_seq", "[α; β] tae: φ <-> [α] tae: φ & [α][β] tae: φ", tae_seq),
        ax("tae_loop", "[α*] tae: φ <-> cl(φ) & [α*](cl(φ) -> [α] tae: φ)", tae_loop),
        ax("tae_solve", "[{x' = f(x)}] tae: P <-> cl(P) & forall t (t >= 0 -> Q)", tae_solve),
        ax(
            "tae_solve_dom",
            "[{x' = f(x) & R}] tae: P <-> cl(P) & forall t (t > 0 -> (forall s (0 <= s & s <= t -> [x := y(s)] R)) -> Q)",
            tae_solve_dom,
        ),
        ax("dl_assign", "[x := e] φ(x) <-> φ(e)", dl_assign),
        ax("dl_test", "[?Q] φ <-> (Q -> φ)", dl_test),
        ax("dl_choice", "[α ++ β] φ <-> [α] φ & [β] φ", dl_choice),
        ax("dl_seq", "[α; β] φ <-> [α][β] φ", dl_seq),
        ax("dl_loop", "[α*] φ <-> φ & [α][α*] φ", dl_loop),
        ax("dl_solve", "[{x' = f(x)}] φ <-> forall t (t >= 0 -> [x := y(t)] φ)", dl_solve),
        ax(
            "dl_solve_dom",
            "[{x' = f(x) & R}] φ <-> forall t (t >= 0 -> (forall s (0 <= s & s <= t -> [x := y(s)] R)) -> [x := y(t)] φ)",
            dl_solve_dom,
        ),
        ax("dl_diamond", "<α> φ <-> !([α] !φ)", dl_diamond),
    ]
}

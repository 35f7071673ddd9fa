//! Propositional, quantifier and modal rules, arithmetic closing and
//! contextual rewriting.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::axioms::closure_of;
use super::registry::{ArgKind, Rule, RuleArg, RuleOutcome, RuleRegistry};
use super::{KernelError, Position, Sequent, Side};
use crate::poly::{check_validity, Verdict};
use crate::syntax::{free_vars, substitute, Formula, Program, Term, TraceFormula, VarId};

type Run = fn(&Sequent, Option<&Position>, &RuleArg) -> Result<RuleOutcome, KernelError>;

struct Basic {
    name: &'static str,
    summary: &'static str,
    arg: ArgKind,
    positioned: bool,
    run: Run,
}

impl Rule for Basic {
    fn name(&self) -> &'static str {
        self.name
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn arg_kind(&self) -> ArgKind {
        self.arg
    }

    fn needs_position(&self) -> bool {
        self.positioned
    }

    fn apply(&self, _: &RuleRegistry, goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
        (self.run)(goal, pos, arg)
    }
}

fn mismatch(rule: &str, expected: &str, found: &Formula) -> KernelError {
    KernelError::ShapeMismatch { rule: rule.into(), expected: expected.into(), found: found.to_string() }
}

/// The top-level formula addressed by `pos`, which must lie on `side`.
fn top<'a>(rule: &str, goal: &'a Sequent, pos: Option<&Position>, side: Side) -> Result<(&'a Formula, usize), KernelError> {
    let pos = pos.expect("checked by the registry");
    if !pos.is_top_level() || pos.side != side {
        let want = if side == Side::Ante { "L<i>" } else { "R<i>" };
        return Err(KernelError::BadPosition(format!("{rule} applies at a top-level position {want}, not {pos}")));
    }
    Ok((goal.top(side, pos.index)?, pos.index))
}

fn set(goal: &Sequent, side: Side, i: usize, f: Formula) -> Sequent {
    let mut out = goal.clone();
    match side {
        Side::Ante => out.ante[i] = f,
        Side::Succ => out.succ[i] = f,
    }
    out
}

fn insert(goal: &Sequent, side: Side, i: usize, f: Formula) -> Sequent {
    let mut out = goal.clone();
    match side {
        Side::Ante => out.ante.insert(i, f),
        Side::Succ => out.succ.insert(i, f),
    }
    out
}

fn imp_r(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("impR", goal, pos, Side::Succ)? {
        (Formula::Imp(a, b), i) => {
            Ok(RuleOutcome::premises(vec![set(goal, Side::Succ, i, (**b).clone()).with_ante((**a).clone())]))
        }
        (f, _) => Err(mismatch("impR", "P -> Q", f)),
    }
}

fn imp_l(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("impL", goal, pos, Side::Ante)? {
        (Formula::Imp(a, b), i) => Ok(RuleOutcome::premises(vec![
            goal.remove(Side::Ante, i)?.with_succ((**a).clone()),
            set(goal, Side::Ante, i, (**b).clone()),
        ])),
        (f, _) => Err(mismatch("impL", "P -> Q", f)),
    }
}

fn and_l(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("andL", goal, pos, Side::Ante)? {
        (Formula::And(a, b), i) => {
            Ok(RuleOutcome::premises(vec![insert(&set(goal, Side::Ante, i, (**a).clone()), Side::Ante, i + 1, (**b).clone())]))
        }
        (f, _) => Err(mismatch("andL", "P & Q", f)),
    }
}

fn and_r(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("andR", goal, pos, Side::Succ)? {
        (Formula::And(a, b), i) => {
            Ok(RuleOutcome::premises(vec![set(goal, Side::Succ, i, (**a).clone()), set(goal, Side::Succ, i, (**b).clone())]))
        }
        (f, _) => Err(mismatch("andR", "P & Q", f)),
    }
}

fn or_l(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("orL", goal, pos, Side::Ante)? {
        (Formula::Or(a, b), i) => {
            Ok(RuleOutcome::premises(vec![set(goal, Side::Ante, i, (**a).clone()), set(goal, Side::Ante, i, (**b).clone())]))
        }
        (f, _) => Err(mismatch("orL", "P | Q", f)),
    }
}

fn or_r(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("orR", goal, pos, Side::Succ)? {
        (Formula::Or(a, b), i) => {
            Ok(RuleOutcome::premises(vec![insert(&set(goal, Side::Succ, i, (**a).clone()), Side::Succ, i + 1, (**b).clone())]))
        }
        (f, _) => Err(mismatch("orR", "P | Q", f)),
    }
}

fn not_l(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("notL", goal, pos, Side::Ante)? {
        (Formula::Not(a), i) => Ok(RuleOutcome::premises(vec![goal.remove(Side::Ante, i)?.with_succ((**a).clone())])),
        (f, _) => Err(mismatch("notL", "!P", f)),
    }
}

fn not_r(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("notR", goal, pos, Side::Succ)? {
        (Formula::Not(a), i) => Ok(RuleOutcome::premises(vec![goal.remove(Side::Succ, i)?.with_ante((**a).clone())])),
        (f, _) => Err(mismatch("notR", "!P", f)),
    }
}

fn equiv_l(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("equivL", goal, pos, Side::Ante)? {
        (Formula::Equiv(a, b), i) => {
            let rest = goal.remove(Side::Ante, i)?;
            Ok(RuleOutcome::premises(vec![
                rest.clone().with_ante((**a).clone()).with_ante((**b).clone()),
                rest.with_succ((**a).clone()).with_succ((**b).clone()),
            ]))
        }
        (f, _) => Err(mismatch("equivL", "P <-> Q", f)),
    }
}

fn equiv_r(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("equivR", goal, pos, Side::Succ)? {
        (Formula::Equiv(a, b), i) => Ok(RuleOutcome::premises(vec![
            set(goal, Side::Succ, i, (**b).clone()).with_ante((**a).clone()),
            set(goal, Side::Succ, i, (**a).clone()).with_ante((**b).clone()),
        ])),
        (f, _) => Err(mismatch("equivR", "P <-> Q", f)),
    }
}

fn cut(goal: &Sequent, _: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let c = arg.formula("cut")?;
    Ok(RuleOutcome::premises(vec![goal.clone().with_succ(c.clone()), goal.clone().with_ante(c.clone())]))
}

fn weaken_l(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (_, i) = top("WL", goal, pos, Side::Ante)?;
    Ok(RuleOutcome::premises(vec![goal.remove(Side::Ante, i)?]))
}

fn weaken_r(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (_, i) = top("WR", goal, pos, Side::Succ)?;
    Ok(RuleOutcome::premises(vec![goal.remove(Side::Succ, i)?]))
}

fn id(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let found = match pos {
        Some(p) if p.is_top_level() => {
            let f = goal.top(p.side, p.index)?;
            let other = match p.side {
                Side::Ante => &goal.succ,
                Side::Succ => &goal.ante,
            };
            other.contains(f)
        }
        Some(p) => return Err(KernelError::BadPosition(format!("id applies at a top-level position, not {p}"))),
        None => goal.ante.iter().any(|f| goal.succ.contains(f)),
    };
    if found {
        Ok(RuleOutcome::closed())
    } else {
        Err(KernelError::ShapeMismatch { rule: "id".into(), expected: "a formula on both sides".into(), found: goal.to_string() })
    }
}

/// A variable for an eigenvariable rule: the requested one, the bound one if it
/// is not free elsewhere, or a fresh one.
fn eigen(goal: &Sequent, bound: &VarId, arg: &RuleArg, rule: &str) -> Result<VarId, KernelError> {
    let free: BTreeSet<VarId> = goal.ante.iter().chain(&goal.succ).flat_map(free_vars).collect();
    match arg {
        RuleArg::Var(y) if free.contains(y) => Err(KernelError::BadArgument(format!("{rule}: `{y}` is free in the sequent"))),
        RuleArg::Var(y) => Ok(y.clone()),
        _ if !free.contains(bound) => Ok(bound.clone()),
        _ => {
            let all = goal.all_vars();
            Ok(VarId::fresh(bound.as_str(), |v| all.contains(v)))
        }
    }
}

fn instantiate(body: &Formula, x: &VarId, e: &Term) -> Result<Formula, KernelError> {
    substitute(body, x, e).map_err(KernelError::Subst)
}

fn all_r(goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("allR", goal, pos, Side::Succ)? {
        (Formula::Forall(x, body), i) => {
            let y = eigen(goal, x, arg, "allR")?;
            let inst = instantiate(body, x, &Term::var(&y))?;
            Ok(RuleOutcome::premises(vec![set(goal, Side::Succ, i, inst)]))
        }
        (f, _) => Err(mismatch("allR", "forall x P", f)),
    }
}

fn exists_l(goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("existsL", goal, pos, Side::Ante)? {
        (Formula::Exists(x, body), i) => {
            let y = eigen(goal, x, arg, "existsL")?;
            let inst = instantiate(body, x, &Term::var(&y))?;
            Ok(RuleOutcome::premises(vec![set(goal, Side::Ante, i, inst)]))
        }
        (f, _) => Err(mismatch("existsL", "exists x P", f)),
    }
}

fn all_l(goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("allL", goal, pos, Side::Ante)? {
        (Formula::Forall(x, body), i) => {
            let inst = instantiate(body, x, arg.term("allL")?)?;
            Ok(RuleOutcome::premises(vec![set(goal, Side::Ante, i, inst)]))
        }
        (f, _) => Err(mismatch("allL", "forall x P", f)),
    }
}

fn exists_r(goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
    match top("existsR", goal, pos, Side::Succ)? {
        (Formula::Exists(x, body), i) => {
            let inst = instantiate(body, x, arg.term("existsR")?)?;
            Ok(RuleOutcome::premises(vec![set(goal, Side::Succ, i, inst)]))
        }
        (f, _) => Err(mismatch("existsR", "exists x P", f)),
    }
}

fn tae_box(f: &Formula) -> Option<(&Program, &Formula)> {
    match f {
        Formula::BoxOp(p, k) => match &**k {
            TraceFormula::Tae(g) => Some((p, g)),
            TraceFormula::State(_) => None,
        },
        _ => None,
    }
}

fn state_box(f: &Formula) -> Option<(&Program, &Formula)> {
    match f {
        Formula::BoxOp(p, k) => match &**k {
            TraceFormula::State(g) => Some((p, g)),
            TraceFormula::Tae(_) => None,
        },
        _ => None,
    }
}

fn godel_tae(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (f, _) = top("G_tae", goal, pos, Side::Succ)?;
    match tae_box(f) {
        Some((_, phi)) => Ok(RuleOutcome::premises(vec![Sequent::goal(phi.clone())])),
        None => Err(mismatch("G_tae", "[α] tae: φ", f)),
    }
}

fn modal_k_tae(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (f, _) = top("K_tae", goal, pos, Side::Succ)?;
    if let Formula::Imp(a, b) = f {
        if let (Some((p, phi)), Some((q, psi))) = (tae_box(a), tae_box(b)) {
            if p == q {
                return Ok(RuleOutcome::premises(vec![
                    Sequent::goal(Formula::imp(closure_of(phi)?, closure_of(psi)?)),
                    Sequent::goal(Formula::box_tae(p.clone(), Formula::imp(phi.clone(), psi.clone()))),
                ]));
            }
        }
    }
    Err(mismatch("K_tae", "[α] tae: φ -> [α] tae: ψ", f))
}

fn top_cl(goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (f, _) = top("TopCl", goal, pos, Side::Succ)?;
    let Formula::Imp(phi, psi) = arg.formula("TopCl")? else {
        return Err(KernelError::BadArgument("TopCl takes the implication φ -> ψ whose closures appear".into()));
    };
    match f {
        Formula::Imp(a, b) if **a == closure_of(phi)? && **b == closure_of(psi)? => {
            Ok(RuleOutcome::premises(vec![Sequent::goal(Formula::imp((**phi).clone(), (**psi).clone()))]))
        }
        _ => Err(mismatch("TopCl", &format!("{} -> {}", closure_of(phi)?, closure_of(psi)?), f)),
    }
}

/// `[α] tae: φ -> [α] cl(φ)`, as an implication or with the trace box among
/// the antecedents.
fn cgg(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (f, _) = top("CGG", goal, pos, Side::Succ)?;
    let follows = |hyp: &Formula, concl: &Formula| -> Result<bool, KernelError> {
        match (tae_box(hyp), state_box(concl)) {
            (Some((p, phi)), Some((q, c))) if p == q => Ok(&closure_of(phi)? == c),
            _ => Ok(false),
        }
    };
    if let Formula::Imp(a, b) = f {
        if follows(a, b)? {
            return Ok(RuleOutcome::closed());
        }
    }
    for h in &goal.ante {
        if follows(h, f)? {
            return Ok(RuleOutcome::closed());
        }
    }
    Err(mismatch("CGG", "[α] tae: φ -> [α] cl(φ)", f))
}

fn godel(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (f, _) = top("G", goal, pos, Side::Succ)?;
    match state_box(f) {
        Some((_, phi)) => Ok(RuleOutcome::premises(vec![Sequent::goal(phi.clone())])),
        None => Err(mismatch("G", "[α] φ", f)),
    }
}

fn monotone(goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (f, _) = top("M", goal, pos, Side::Succ)?;
    if let Formula::Imp(a, b) = f {
        if let (Some((p, psi)), Some((q, phi))) = (state_box(a), state_box(b)) {
            if p == q {
                return Ok(RuleOutcome::premises(vec![Sequent::goal(Formula::imp(psi.clone(), phi.clone()))]));
            }
        }
    }
    Err(mismatch("M", "[α] ψ -> [α] φ", f))
}

/// Outcome of discharging a goal by real arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithOutcome {
    Closed,
    Open(String),
}

/// Closes `Γ ⊢ Δ` when `∧Γ_fo -> ∨Δ_fo` is valid, where the first-order parts
/// keep only the formulas without modalities.
pub fn close_by_arith(goal: &Sequent) -> ArithOutcome {
    let ante = goal.ante.iter().filter(|f| f.is_first_order()).cloned();
    let succ = goal.succ.iter().filter(|f| f.is_first_order()).cloned();
    let claim = Formula::imp(Formula::and_all(ante), Formula::or_all(succ));
    match check_validity(&claim) {
        Verdict::Valid(_) => ArithOutcome::Closed,
        other => ArithOutcome::Open(other.describe()),
    }
}

fn close_arith(goal: &Sequent, _: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
    Ok(match close_by_arith(goal) {
        ArithOutcome::Closed => RuleOutcome::closed(),
        ArithOutcome::Open(reason) => RuleOutcome::Stuck(format!("close_arith: {reason}")),
    })
}

/// Replaces the first-order subformula at `pos` by `psi`; the second sequent is
/// the side goal `⊢ φ <-> ψ`.
pub fn rewrite_in_context(goal: &Sequent, pos: &Position, psi: &Formula) -> Result<(Sequent, Sequent), KernelError> {
    let phi = goal.at(pos)?;
    if !phi.is_first_order() || !psi.is_first_order() {
        return Err(KernelError::ContextError(format!("rewrite needs first-order formulas, found `{phi}` and `{psi}`")));
    }
    let binders = goal.binders_at(pos)?;
    let before = free_vars(phi);
    let captured: Vec<String> =
        free_vars(psi).into_iter().filter(|v| binders.contains(v) && !before.contains(v)).map(|v| v.to_string()).collect();
    if !captured.is_empty() {
        return Err(KernelError::ContextError(format!("the replacement reads {} which is bound at {pos}", captured.join(", "))));
    }
    Ok((goal.replace(pos, psi.clone())?, Sequent::goal(Formula::equiv(phi.clone(), psi.clone()))))
}

fn rewrite(goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
    let (main, side) = rewrite_in_context(goal, pos.expect("checked by the registry"), arg.formula("rewrite")?)?;
    Ok(RuleOutcome::premises(vec![main, side]))
}

pub(super) fn all() -> Vec<Arc<dyn Rule>> {
    let rule = |name, summary, arg, positioned, run| Arc::new(Basic { name, summary, arg, positioned, run }) as Arc<dyn Rule>;
    use ArgKind::*;
    vec![
        rule("G_tae", "from ⊢ φ conclude ⊢ [α] tae: φ", None, true, godel_tae),
        rule("K_tae", "from cl(φ) -> cl(ψ) and [α] tae: (φ -> ψ) conclude [α] tae: φ -> [α] tae: ψ", None, true, modal_k_tae),
        rule("TopCl", "from φ -> ψ conclude cl(φ) -> cl(ψ)", Formula, true, top_cl),
        rule("CGG", "[α] tae: φ -> [α] cl(φ)", None, true, cgg),
        rule("G", "from ⊢ φ conclude ⊢ [α] φ", None, true, godel),
        rule("M", "from ψ -> φ conclude [α] ψ -> [α] φ", None, true, monotone),
        rule("impL", "implication on the left", None, true, imp_l),
        rule("impR", "implication on the right", None, true, imp_r),
        rule("andL", "conjunction on the left", None, true, and_l),
        rule("andR", "conjunction on the right", None, true, and_r),
        rule("orL", "disjunction on the left", None, true, or_l),
        rule("orR", "disjunction on the right", None, true, or_r),
        rule("notL", "negation on the left", None, true, not_l),
        rule("notR", "negation on the right", None, true, not_r),
        rule("equivL", "equivalence on the left", None, true, equiv_l),
        rule("equivR", "equivalence on the right", None, true, equiv_r),
        rule("cut", "cut in a formula", Formula, false, cut),
        rule("WL", "weaken an antecedent", None, true, weaken_l),
        rule("WR", "weaken a succedent", None, true, weaken_r),
        rule("id", "close a goal with a formula on both sides", None, false, id),
        rule("allR", "universal on the right, with an optional eigenvariable", OptionalVar, true, all_r),
        rule("allL", "universal on the left, instantiated with a term", Term, true, all_l),
        rule("existsR", "existential on the right, instantiated with a term", Term, true, exists_r),
        rule("existsL", "existential on the left, with an optional eigenvariable", OptionalVar, true, exists_l),
        rule("rewrite", "replace a first-order subformula by an equivalent one", Formula, true, rewrite),
        rule("close_arith", "close a goal by real arithmetic", None, false, close_arith),
    ]
}

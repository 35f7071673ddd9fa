//! Derived rules. Each one is checked by expanding it into primitive rules on a
//! local proof; the expansion's open leaves are the rule's premises.

use std::sync::Arc;

use super::axioms::closure_of;
use super::proof::Proof;
use super::registry::{ArgKind, Rule, RuleArg, RuleOutcome, RuleRegistry};
use super::{KernelError, Position, Sequent, Side};
use crate::syntax::{Formula, Program, TraceFormula};

struct Local<'a> {
    reg: &'a RuleRegistry,
    proof: Proof,
}

impl<'a> Local<'a> {
    fn new(reg: &'a RuleRegistry, goal: &Sequent) -> Self {
        Local { reg, proof: Proof::new(goal.clone()) }
    }

    fn seq(&self, id: usize) -> &Sequent {
        self.proof.sequent(id)
    }

    fn step(&mut self, goal: usize, rule: &str, pos: Option<Position>, arg: RuleArg) -> Result<Vec<usize>, KernelError> {
        self.proof.apply(self.reg, goal, rule, pos, arg)
    }

    fn one(&mut self, goal: usize, rule: &str, pos: Position) -> Result<usize, KernelError> {
        Ok(self.step(goal, rule, Some(pos), RuleArg::None)?[0])
    }

    fn two(&mut self, goal: usize, rule: &str, pos: Option<Position>, arg: RuleArg) -> Result<(usize, usize), KernelError> {
        let ids = self.step(goal, rule, pos, arg)?;
        Ok((ids[0], ids[1]))
    }

    fn close(&mut self, goal: usize) -> Result<(), KernelError> {
        self.step(goal, "id", None, RuleArg::None).map(|_| ())
    }

    /// Weakens every formula except the listed antecedent and succedent indices.
    fn isolate(&mut self, mut goal: usize, keep_ante: &[usize], keep_succ: &[usize]) -> Result<usize, KernelError> {
        for i in (0..self.seq(goal).succ.len()).rev() {
            if !keep_succ.contains(&i) {
                goal = self.one(goal, "WR", Position::succ(i))?;
            }
        }
        for i in (0..self.seq(goal).ante.len()).rev() {
            if !keep_ante.contains(&i) {
                goal = self.one(goal, "WL", Position::ante(i))?;
            }
        }
        Ok(goal)
    }

    /// Checks that the open leaves are exactly `premises` and packages the result.
    fn finish(self, rule: &str, premises: Vec<Sequent>) -> Result<RuleOutcome, KernelError> {
        let mut leaves: Vec<Sequent> = Vec::new();
        for id in self.proof.open_goals() {
            let s = self.proof.sequent(id).clone();
            if !leaves.contains(&s) {
                leaves.push(s);
            }
        }
        let mut want: Vec<Sequent> = Vec::new();
        for p in premises {
            if !want.contains(&p) {
                want.push(p);
            }
        }
        if leaves.len() != want.len() || leaves.iter().any(|l| !want.contains(l)) {
            let show = |v: &[Sequent]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("; ");
            return Err(KernelError::Expansion {
                rule: rule.into(),
                detail: format!("expansion left [{}] but the rule states [{}]", show(&leaves), show(&want)),
            });
        }
        Ok(RuleOutcome::Premises { goals: want, expansion: Some(self.proof) })
    }
}

fn mismatch(rule: &str, expected: &str, found: &Formula) -> KernelError {
    KernelError::ShapeMismatch { rule: rule.into(), expected: expected.into(), found: found.to_string() }
}

fn succ_top<'a>(rule: &str, goal: &'a Sequent, pos: Option<&Position>) -> Result<(&'a Formula, usize), KernelError> {
    let pos = pos.expect("checked by the registry");
    if !pos.is_top_level() || pos.side != Side::Succ {
        return Err(KernelError::BadPosition(format!("{rule} applies at a top-level succedent R<i>, not {pos}")));
    }
    Ok((goal.top(Side::Succ, pos.index)?, pos.index))
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

/// From `ψ -> φ` conclude `[α] tae: ψ -> [α] tae: φ`; expands to K_tae, TopCl and G_tae.
struct MonotoneTae;

impl Rule for MonotoneTae {
    fn name(&self) -> &'static str {
        "M_tae"
    }

    fn summary(&self) -> &'static str {
        "from ψ -> φ conclude [α] tae: ψ -> [α] tae: φ"
    }

    fn apply(&self, reg: &RuleRegistry, goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
        let (f, i) = succ_top("M_tae", goal, pos)?;
        let (psi, phi) = match f {
            Formula::Imp(a, b) => match (tae_box(a), tae_box(b)) {
                (Some((p, psi)), Some((q, phi))) if p == q => (psi.clone(), phi.clone()),
                _ => return Err(mismatch("M_tae", "[α] tae: ψ -> [α] tae: φ", f)),
            },
            _ => return Err(mismatch("M_tae", "[α] tae: ψ -> [α] tae: φ", f)),
        };
        let imp = Formula::imp(psi, phi);
        let mut local = Local::new(reg, goal);
        let (closures, boxed) = local.two(0, "K_tae", Some(Position::succ(i)), RuleArg::None)?;
        local.step(closures, "TopCl", Some(Position::succ(0)), RuleArg::Formula(imp.clone()))?;
        local.step(boxed, "G_tae", Some(Position::succ(0)), RuleArg::None)?;
        local.finish("M_tae", vec![Sequent::goal(imp)])
    }
}

/// From `cl(φ) ⊢ [α] tae: φ` conclude `cl(φ) ⊢ [α*] tae: φ`; expands to the
/// tae loop axiom, andR, id, G and impR.
struct InductionTae;

impl Rule for InductionTae {
    fn name(&self) -> &'static str {
        "Ind_tae"
    }

    fn summary(&self) -> &'static str {
        "from cl(φ) |- [α] tae: φ conclude cl(φ) |- [α*] tae: φ"
    }

    fn apply(&self, reg: &RuleRegistry, goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
        let (f, i) = succ_top("Ind_tae", goal, pos)?;
        let (body, phi) = match tae_box(f) {
            Some((Program::Loop(a), phi)) => ((**a).clone(), phi.clone()),
            _ => return Err(mismatch("Ind_tae", "[α*] tae: φ", f)),
        };
        let c = closure_of(&phi)?;
        let j = goal.ante.iter().position(|h| h == &c).ok_or_else(|| KernelError::ShapeMismatch {
            rule: "Ind_tae".into(),
            expected: format!("the antecedent {c}"),
            found: goal.to_string(),
        })?;
        let mut local = Local::new(reg, goal);
        let g = local.isolate(0, &[j], &[i])?;
        let g = local.one(g, "tae_loop", Position::succ(0))?;
        let (base, step) = local.two(g, "andR", Some(Position::succ(0)), RuleArg::None)?;
        local.close(base)?;
        let g = local.one(step, "G", Position::succ(0))?;
        local.one(g, "impR", Position::succ(0))?;
        local.finish("Ind_tae", vec![Sequent::new(vec![c], vec![Formula::box_tae(body, phi)])])
    }
}

/// Loop invariant rule: from `Γ ⊢ cl(ψ), Δ`, `cl(ψ) ⊢ [α] tae: ψ` and `ψ ⊢ φ`
/// conclude `Γ ⊢ [α*] tae: φ, Δ`.
struct LoopTae;

impl Rule for LoopTae {
    fn name(&self) -> &'static str {
        "loop_tae"
    }

    fn summary(&self) -> &'static str {
        "loop invariant ψ: Γ |- cl(ψ), Δ and cl(ψ) |- [α] tae: ψ and ψ |- φ"
    }

    fn arg_kind(&self) -> ArgKind {
        ArgKind::Formula
    }

    fn apply(
        &self,
        reg: &RuleRegistry,
        goal: &Sequent,
        pos: Option<&Position>,
        arg: &RuleArg,
    ) -> Result<RuleOutcome, KernelError> {
        let (f, i) = succ_top("loop_tae", goal, pos)?;
        let psi = arg.formula("loop_tae")?.clone();
        let (looped, body, phi) = match tae_box(f) {
            Some((p @ Program::Loop(a), phi)) => (p.clone(), (**a).clone(), phi.clone()),
            _ => return Err(mismatch("loop_tae", "[α*] tae: φ", f)),
        };
        let c = closure_of(&psi)?;
        let inv_loop = Formula::box_tae(looped.clone(), psi.clone());
        let lemma = Formula::imp(c.clone(), inv_loop.clone());
        let mono = Formula::imp(inv_loop.clone(), f.clone());

        let mut local = Local::new(reg, goal);
        let (use_lemma, have_lemma) = local.two(0, "cut", None, RuleArg::Formula(lemma))?;

        let last = local.seq(use_lemma).succ.len() - 1;
        let g = local.one(use_lemma, "impR", Position::succ(last))?;
        let (na, ns) = (local.seq(g).ante.len(), local.seq(g).succ.len());
        let g = local.isolate(g, &[na - 1], &[ns - 1])?;
        local.one(g, "Ind_tae", Position::succ(0))?;

        let last = local.seq(have_lemma).ante.len() - 1;
        let (init, post) = local.two(have_lemma, "impL", Some(Position::ante(last)), RuleArg::None)?;
        local.one(init, "WR", Position::succ(i))?;
        let (show_mono, use_mono) = local.two(post, "cut", None, RuleArg::Formula(mono))?;
        let ns = local.seq(show_mono).succ.len();
        let g = local.isolate(show_mono, &[], &[ns - 1])?;
        let g = local.one(g, "M_tae", Position::succ(0))?;
        local.one(g, "impR", Position::succ(0))?;
        let last = local.seq(use_mono).ante.len() - 1;
        let (a, b) = local.two(use_mono, "impL", Some(Position::ante(last)), RuleArg::None)?;
        local.close(a)?;
        local.close(b)?;

        let mut rest = goal.remove(Side::Succ, i)?;
        rest.succ.push(c.clone());
        local.finish(
            "loop_tae",
            vec![rest, Sequent::new(vec![c], vec![Formula::box_tae(body, psi.clone())]), Sequent::new(vec![psi], vec![phi])],
        )
    }
}

/// From `ψ -> [α] tae: φ` and `cl(φ) -> [β] tae: φ` conclude
/// `ψ -> [α; β] tae: φ`; expands through the tae sequence axiom, cut, CGG and M.
struct CompositionTae;

impl Rule for CompositionTae {
    fn name(&self) -> &'static str {
        "Comp_tae"
    }

    fn summary(&self) -> &'static str {
        "from ψ -> [α] tae: φ and cl(φ) -> [β] tae: φ conclude ψ -> [α; β] tae: φ"
    }

    fn apply(&self, reg: &RuleRegistry, goal: &Sequent, pos: Option<&Position>, _: &RuleArg) -> Result<RuleOutcome, KernelError> {
        let (f, i) = succ_top("Comp_tae", goal, pos)?;
        let shape = "ψ -> [α; β] tae: φ";
        let Formula::Imp(psi, boxed) = f else { return Err(mismatch("Comp_tae", shape, f)) };
        let (first, second, phi) = match tae_box(boxed) {
            Some((Program::Seq(a, b), phi)) => ((**a).clone(), (**b).clone(), phi.clone()),
            _ => return Err(mismatch("Comp_tae", shape, f)),
        };
        let psi = (**psi).clone();
        let c = closure_of(&phi)?;
        let head = Formula::box_tae(first.clone(), phi.clone());
        let tail = Formula::box_state(first.clone(), Formula::box_tae(second.clone(), phi.clone()));
        let first_cl = Formula::box_state(first.clone(), c.clone());
        let premise1 = Formula::imp(psi.clone(), head.clone());
        let premise2 = Formula::imp(c.clone(), Formula::box_tae(second, phi));

        let mut local = Local::new(reg, goal);
        let g = local.isolate(0, &[], &[i])?;
        let g = local.one(g, "tae_seq", Position::succ(0).child(1))?;
        let (show1, use1) = local.two(g, "cut", None, RuleArg::Formula(premise1.clone()))?;
        local.one(show1, "WR", Position::succ(0))?;
        let g = local.one(use1, "impR", Position::succ(0))?;
        let (a, b) = local.two(g, "impL", Some(Position::ante(0)), RuleArg::None)?;
        local.close(a)?;
        let g = local.one(b, "WL", Position::ante(1))?;
        let (left, right) = local.two(g, "andR", Some(Position::succ(0)), RuleArg::None)?;
        local.close(left)?;
        let (show_cl, use_cl) = local.two(right, "cut", None, RuleArg::Formula(first_cl.clone()))?;
        let g = local.one(show_cl, "WR", Position::succ(0))?;
        local.step(g, "CGG", Some(Position::succ(0)), RuleArg::None)?;
        let (show_m, use_m) = local.two(use_cl, "cut", None, RuleArg::Formula(Formula::imp(first_cl, tail)))?;
        let g = local.isolate(show_m, &[], &[1])?;
        local.one(g, "M", Position::succ(0))?;
        let (a, b) = local.two(use_m, "impL", Some(Position::ante(2)), RuleArg::None)?;
        local.close(a)?;
        local.close(b)?;
        local.finish("Comp_tae", vec![Sequent::goal(premise1), Sequent::goal(premise2)])
    }
}

pub(super) fn all() -> Vec<Arc<dyn Rule>> {
    vec![Arc::new(MonotoneTae), Arc::new(InductionTae), Arc::new(LoopTae), Arc::new(CompositionTae)]
}

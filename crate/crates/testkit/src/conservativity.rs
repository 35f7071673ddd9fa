//! Every unfolding step of a loop-free program by the dL axioms, with both
//! sides of the axiom instance evaluated at concrete states.

use std::collections::{BTreeMap, BTreeSet};

use pdtl_core::kernel::{Position, RuleArg, RuleOutcome, RuleRegistry, Sequent, Side};
use pdtl_core::sim::{eval_state_formula, EnumConfig, Real, State, Truth};
use pdtl_core::syntax::{free_vars, Formula, Program, TraceFormula};
use pdtl_core::Rational;

use crate::{axiom_for, form, innermost_modality, prog};

/// The dL axioms exercised; the loop axiom is left out since loop-free
/// programs never produce an instance of it.
pub const AXIOMS: [&str; 7] = ["dl_assign", "dl_test", "dl_choice", "dl_seq", "dl_solve", "dl_solve_dom", "dl_diamond"];

#[derive(Debug, Clone, Default)]
pub struct Tally {
    /// Instances whose sides were both decided, by axiom.
    pub compared: BTreeMap<&'static str, usize>,
    /// Comparisons skipped because one side was Unknown.
    pub unknown: usize,
    /// Instances skipped because the left side would be evaluated on sampled
    /// durations only.
    pub sampled: usize,
}

impl Tally {
    pub fn total(&self) -> usize {
        self.compared.values().sum()
    }

    pub fn merge(&mut self, other: &Tally) {
        for (k, v) in &other.compared {
            *self.compared.entry(k).or_default() += v;
        }
        self.unknown += other.unknown;
        self.sampled += other.sampled;
    }
}

/// A state plus spare values for variables the axioms introduce, such as the
/// time of an ODE solution.
#[derive(Debug, Clone)]
pub struct Point {
    pub state: State,
    pub spare: Vec<Rational>,
}

impl Point {
    fn covering(&self, f: &Formula, g: &Formula) -> State {
        let mut w = self.state.clone();
        let missing: BTreeSet<_> = free_vars(f).into_iter().chain(free_vars(g)).filter(|x| w.get(x).is_none()).collect();
        for (k, x) in missing.into_iter().enumerate() {
            w.set(x, Real::Exact(self.spare[k % self.spare.len()].clone()));
        }
        w
    }
}

fn ode_on_sampled_durations(f: &Formula) -> bool {
    match f {
        Formula::BoxOp(p, k) | Formula::DiamondOp(p, k) => {
            matches!(&**p, Program::Ode(_)) && !matches!(&**k, TraceFormula::State(g) if g.is_quantifier_free())
        }
        _ => false,
    }
}

/// Unfolds `[α] φ` and `<α> φ` innermost modality first and compares the two
/// sides of each axiom instance at every point.
pub fn check_axiom_instances(program: &str, post: &str, points: &[Point], tally: &mut Tally) -> Result<(), String> {
    let reg = RuleRegistry::standard();
    let cfg = EnumConfig::default();
    let (p, phi) = (prog(program), form(post));
    let starts = [Formula::box_state(p.clone(), phi.clone()), Formula::diamond(p, TraceFormula::State(phi))];
    for start in starts {
        let mut goal = Sequent::goal(start);
        while let Some(path) = innermost_modality(&goal.succ[0]) {
            let pos = Position { side: Side::Succ, index: 0, path };
            let lhs = goal.at(&pos).map_err(|e| e.to_string())?.clone();
            let name = axiom_for(&lhs).ok_or_else(|| format!("no axiom unfolds {lhs}"))?;
            let next = match reg.apply(name, &goal, Some(&pos), &RuleArg::None) {
                Ok(RuleOutcome::Premises { mut goals, .. }) if goals.len() == 1 => goals.remove(0),
                other => return Err(format!("{name} on {lhs}: {other:?}")),
            };
            let rhs = next.at(&pos).map_err(|e| e.to_string())?.clone();
            goal = next;
            if ode_on_sampled_durations(&lhs) {
                tally.sampled += 1;
                continue;
            }
            for pt in points {
                let w = pt.covering(&lhs, &rhs);
                match (eval_state_formula(&w, &lhs, &cfg), eval_state_formula(&w, &rhs, &cfg)) {
                    (Truth::Unknown(_), _) | (_, Truth::Unknown(_)) => tally.unknown += 1,
                    (a, b) if a == b => *tally.compared.entry(name).or_default() += 1,
                    (a, b) => return Err(format!("{name}: {lhs} is {a} but {rhs} is {b} at {w}")),
                }
            }
        }
    }
    Ok(())
}

//! Kernel against simulator: whatever the kernel proves about an unrolled
//! linear program from a box of initial states, the simulator must confirm
//! at the corners and centre of the box.

use num_traits::Zero;
use pdtl_core::kernel::{close_by_arith, ArithOutcome, Position, RuleArg, RuleOutcome, RuleRegistry, Sequent, Side};
use pdtl_core::poly::ratio;
use pdtl_core::sim::{eval_box_tae, BoxVerdict, EnumConfig, Measure, State, TaeVerdict};
use pdtl_core::syntax::{Formula, VarId};
use proptest::prelude::*;

use crate::gen::{linear_atom, linear_program};
use crate::{axiom_for, form, innermost_modality, prog};

#[derive(Debug, Clone)]
pub struct Instance {
    /// Lower and upper bounds of `x` and `y` in the initial box.
    pub bounds: [(i64, i64); 2],
    pub body: String,
    pub copies: usize,
    pub post: String,
}

impl Instance {
    pub fn program(&self) -> String {
        vec![format!("({})", self.body); self.copies].join("; ")
    }

    pub fn precondition(&self) -> String {
        let [(xl, xh), (yl, yh)] = self.bounds;
        format!("{xl} <= x & x <= {xh} & {yl} <= y & y <= {yh}")
    }

    /// `P -> [α] tae: φ`
    pub fn claim(&self) -> Formula {
        Formula::imp(form(&self.precondition()), Formula::box_tae(prog(&self.program()), form(&self.post)))
    }

    /// Corners and centre of the initial box.
    pub fn states(&self) -> Vec<State> {
        let [(xl, xh), (yl, yh)] = self.bounds;
        let mid = |a: i64, b: i64| ratio(a + b, 2);
        let pts = [
            (ratio(xl, 1), ratio(yl, 1)),
            (ratio(xl, 1), ratio(yh, 1)),
            (ratio(xh, 1), ratio(yl, 1)),
            (ratio(xh, 1), ratio(yh, 1)),
            (mid(xl, xh), mid(yl, yh)),
        ];
        pts.into_iter().map(|(a, b)| State::exact([(VarId::named("x"), a), (VarId::named("y"), b)])).collect()
    }
}

/// Bound atoms are weighted up so that a fair share of claims is provable.
fn postcondition() -> impl Strategy<Value = String> {
    let var = prop_oneof![Just("x"), Just("y"), Just("x + y"), Just("x - y")];
    let op = prop_oneof![Just("<"), Just("<="), Just(">"), Just(">=")];
    let bound = (var, op, -8i64..=8).prop_map(|(v, op, k)| format!("{v} {op} {k}"));
    prop_oneof![
        3 => bound.clone(),
        1 => (bound.clone(), bound).prop_map(|(a, b)| format!("({a}) & ({b})")),
        1 => linear_atom(),
    ]
}

pub fn instance() -> impl Strategy<Value = Instance> {
    let range = (-3i64..=1, 0i64..=3).prop_map(|(lo, w)| (lo, lo + w));
    (range.clone(), range, linear_program(), 1usize..=3, postcondition()).prop_map(|(bx, by, body, copies, post)| Instance {
        bounds: [bx, by],
        body,
        copies,
        post,
    })
}

/// Unfolds every modality innermost first and closes the remaining
/// first-order goal by arithmetic.
pub fn prove(claim: &Formula) -> Result<bool, String> {
    let reg = RuleRegistry::standard();
    let mut goal = Sequent::goal(claim.clone());
    while let Some(path) = innermost_modality(&goal.succ[0]) {
        let pos = Position { side: Side::Succ, index: 0, path };
        let here = goal.at(&pos).map_err(|e| e.to_string())?;
        let Some(name) = axiom_for(here) else { return Ok(false) };
        goal = match reg.apply(name, &goal, Some(&pos), &RuleArg::None) {
            Ok(RuleOutcome::Premises { mut goals, .. }) if goals.len() == 1 => goals.remove(0),
            other => return Err(format!("{name} on {here}: {other:?}")),
        };
    }
    Ok(matches!(close_by_arith(&goal), ArithOutcome::Closed))
}

fn exact_zero(m: &Measure) -> bool {
    matches!(m, Measure::Exact(q) if q.is_zero())
}

/// The simulator agrees at every sample state: tae holds on every enumerated
/// trace with exact measure zero.
pub fn confirm(inst: &Instance) -> Result<(), String> {
    let p = prog(&inst.program());
    let phi = form(&inst.post);
    let cfg = EnumConfig::default();
    for w in inst.states() {
        let report = eval_box_tae(&p, &w, &phi, &cfg);
        if report.verdict != BoxVerdict::Holds {
            return Err(format!("{} from {w}: {:?}", inst.claim(), report.verdict));
        }
        for r in &report.records {
            match &r.verdict {
                TaeVerdict::Holds { report } if report.exact && exact_zero(&report.measure) => {}
                other => return Err(format!("{} from {w} on {}: {other:?}", inst.claim(), r.trace)),
            }
        }
    }
    Ok(())
}

/// Outcome over a corpus: how many claims closed, and the first
/// disagreement if any.
pub fn run_corpus(instances: &[Instance]) -> Result<usize, String> {
    let mut closed = 0;
    for inst in instances {
        if prove(&inst.claim())? {
            confirm(inst)?;
            closed += 1;
        }
    }
    Ok(closed)
}

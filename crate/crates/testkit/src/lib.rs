//! Generators and per-instance checks shared by the property suites and the
//! acceptance run. Each check returns an error message describing the first
//! counterexample it finds.

pub mod conservativity;
pub mod differential;
pub mod gen;
pub mod traces;
pub mod transform;

use pdtl_core::syntax::{parse_program, parse_state_formula, Formula, OdeSystem, Program, TraceFormula};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub fn form(s: &str) -> Formula {
    parse_state_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn prog(s: &str) -> Program {
    parse_program(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Whether a generated instance was usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Checked,
    Skipped,
}

/// Path to a modality whose postcondition has no modality of its own.
pub fn innermost_modality(f: &Formula) -> Option<Vec<usize>> {
    let under = |i: usize, g: &Formula| {
        innermost_modality(g).map(|mut p| {
            p.insert(0, i);
            p
        })
    };
    match f {
        Formula::Atom(_) => None,
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => under(0, g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Equiv(a, b) => under(0, a).or_else(|| under(1, b)),
        Formula::BoxOp(_, k) | Formula::DiamondOp(_, k) => under(1, k.formula()).or(Some(Vec::new())),
    }
}

/// The axiom that unfolds a modality of this shape, if any.
pub fn axiom_for(f: &Formula) -> Option<&'static str> {
    let solve = |sys: &OdeSystem, plain, dom| if sys.has_domain() { dom } else { plain };
    match f {
        Formula::DiamondOp(_, k) => matches!(**k, TraceFormula::State(_)).then_some("dl_diamond"),
        Formula::BoxOp(p, k) => {
            let tae = matches!(**k, TraceFormula::Tae(_));
            Some(match (&**p, tae) {
                (Program::Assign(..), false) => "dl_assign",
                (Program::Test(_), false) => "dl_test",
                (Program::Choice(..), false) => "dl_choice",
                (Program::Seq(..), false) => "dl_seq",
                (Program::Ode(sys), false) => solve(sys, "dl_solve", "dl_solve_dom"),
                (Program::Assign(..), true) => "tae_assign",
                (Program::Test(_), true) => "tae_test",
                (Program::Choice(..), true) => "tae_choice",
                (Program::Seq(..), true) => "tae_seq",
                (Program::Ode(sys), true) => solve(sys, "tae_solve", "tae_solve_dom"),
                (Program::Loop(_), _) => return None,
            })
        }
        _ => None,
    }
}

/// Draws `cases` values from `strategy` with a fixed seed, for runs outside
/// the proptest macro.
pub fn draw<S: Strategy>(strategy: &S, cases: usize, seed: u64) -> Vec<S::Value> {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &bytes);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    (0..cases).map(|_| strategy.new_tree(&mut runner).expect("strategy without filters").current()).collect()
}

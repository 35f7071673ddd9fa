//! Sequent-calculus proof kernel.
//!
//! Every rule, axiom and derived rule lives in a [`RuleRegistry`] as a
//! `dyn Rule`. Derived rules justify each application by replaying a
//! primitive derivation, which is kept on the proof node.

mod axioms;
mod derived;
mod proof;
mod registry;
mod rules;
mod script;
mod sequent;

#[cfg(test)]
mod tests;

pub use axioms::{assignment_chain, closure_of, Axiom};
pub use proof::{Proof, ProofNode, Step};
pub use registry::{ArgKind, Rule, RuleArg, RuleOutcome, RuleRegistry};
pub use rules::{close_by_arith, rewrite_in_context, ArithOutcome};
pub use script::{check_script, OpenGoal, ProofScript, ScriptReport, ScriptStep, AUTO_ARITH};
pub use sequent::{Position, Sequent, Side};

use crate::ode::OdeError;
use crate::poly::QeError;
use crate::syntax::SubstError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("{rule}: expected {expected}, found `{found}`")]
    ShapeMismatch { rule: String, expected: String, found: String },
    #[error("bad position: {0}")]
    BadPosition(String),
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Qe(#[from] QeError),
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error("no admissible order for the assignments: {0}")]
    NoAssignmentOrder(String),
    #[error("context error: {0}")]
    ContextError(String),
    #[error("no goal with id {0}")]
    NoSuchGoal(usize),
    #[error("goal {0} is not open")]
    GoalNotOpen(usize),
    #[error("{rule}: expansion does not match the stated premises: {detail}")]
    Expansion { rule: String, detail: String },
    #[error("line {line}: {message}")]
    ScriptSyntax { line: usize, message: String },
    #[error("line {line}: claim `{found}` does not match the goal `{expected}`")]
    ClaimMismatch { line: usize, expected: String, found: String },
    #[error("line {line}: {source}")]
    ReplayMismatch { line: usize, source: Box<KernelError> },
}

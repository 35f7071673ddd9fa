//! Executable trace semantics: trace enumeration, the time-almost-everywhere
//! check, and three-valued evaluation of formulas at states.

mod cells;
mod enumerate;
mod eval;
mod measure;
mod state;
mod trace;

#[cfg(test)]
mod tests;

use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::ode::FlowError;
use crate::poly::{ratio, RootError};
use crate::syntax::VarId;
use crate::Rational;

pub use enumerate::{enumerate_traces, reach_relation};
pub use eval::{
    eval_box_tae, eval_state_formula, tae_eval, trace_seed, BoxTaeReport, BoxVerdict, Postcondition, TaeVerdict, TraceRecord,
};
pub use measure::{violation_measure, wilson, Measure, ViolationReport, Witness, ZeroTest};
pub use state::{Real, State};
pub use trace::{compose, position_to_time, Flow, FlowKind, Trace};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("variable {0} has no value")]
    Unvalued(VarId),
    #[error("the flow has no exact solution")]
    NotExact,
    #[error("traces do not compose: {0}")]
    NotComposable(String),
    #[error("position out of range")]
    OutOfRange,
    #[error("postcondition `{0}` is not quantifier-free")]
    QuantifiedPostcondition(String),
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("more than {0} traces")]
    TooManyTraces(usize),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Kleene three-valued truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    True,
    False,
    Unknown(String),
}

impl From<bool> for Truth {
    fn from(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl Truth {
    pub fn is_true(&self) -> bool {
        matches!(self, Truth::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Truth::False)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown(_) => None,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            u => u,
        }
    }

    /// Short-circuits on `False`.
    pub fn and(self, other: impl FnOnce() -> Truth) -> Truth {
        match self {
            Truth::False => Truth::False,
            Truth::True => other(),
            u => match other() {
                Truth::False => Truth::False,
                _ => u,
            },
        }
    }

    /// Short-circuits on `True`.
    pub fn or(self, other: impl FnOnce() -> Truth) -> Truth {
        match self {
            Truth::True => Truth::True,
            Truth::False => other(),
            u => match other() {
                Truth::True => Truth::True,
                _ => u,
            },
        }
    }

    pub fn equiv(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::Unknown(w), _) | (_, Truth::Unknown(w)) => Truth::Unknown(w),
            (a, b) => Truth::from(a == b),
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truth::True => write!(f, "true"),
            Truth::False => write!(f, "false"),
            Truth::Unknown(w) => write!(f, "unknown ({w})"),
        }
    }
}

/// Knobs for trace enumeration and the measure checks.
#[derive(Debug, Clone)]
pub struct EnumConfig {
    /// Maximum number of loop iterations.
    pub unroll: usize,
    /// ODE durations to try; each is cut short where the domain stops holding.
    pub durations: Vec<Rational>,
    /// Decide ODE boxes with state postconditions over all durations when the
    /// flow is polynomial.
    pub exhaustive_ode: bool,
    /// Monte Carlo samples per numerically integrated flow.
    pub mc_samples: usize,
    pub seed: u64,
    /// RK4 step size.
    pub step: f64,
    pub max_traces: usize,
    /// A failure measure counts as zero below this fraction of the flow duration.
    pub zero_threshold: f64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            unroll: 3,
            durations: vec![Rational::zero(), ratio(1, 4), ratio(1, 2), ratio(1, 1), ratio(2, 1)],
            exhaustive_ode: true,
            mc_samples: 100_000,
            seed: 0,
            step: 1e-3,
            max_traces: 200_000,
            zero_threshold: 1e-4,
        }
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::proof::Proof;
use super::{KernelError, Position, Sequent};
use crate::syntax::{parse_state_formula, parse_term, Formula, Term, VarId};

/// What a rule expects after `with`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgKind {
    None,
    Formula,
    Term,
    /// Axioms: an optional formula, the left-hand side to restore when the
    /// equivalence is used right to left.
    OptionalFormula,
    OptionalVar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleArg {
    None,
    Formula(Formula),
    Term(Term),
    Var(VarId),
}

impl RuleArg {
    pub fn parse(kind: ArgKind, text: Option<&str>) -> Result<RuleArg, KernelError> {
        let text = text.map(str::trim).filter(|t| !t.is_empty());
        let parse_err = |e: crate::syntax::ParseError| KernelError::BadArgument(e.to_string());
        match (kind, text) {
            (ArgKind::None, None) | (ArgKind::OptionalFormula, None) | (ArgKind::OptionalVar, None) => Ok(RuleArg::None),
            (ArgKind::None, Some(t)) => Err(KernelError::BadArgument(format!("unexpected argument `{t}`"))),
            (ArgKind::Formula | ArgKind::Term, None) => Err(KernelError::BadArgument("missing argument".into())),
            (ArgKind::Formula | ArgKind::OptionalFormula, Some(t)) => {
                parse_state_formula(t).map(RuleArg::Formula).map_err(parse_err)
            }
            (ArgKind::Term, Some(t)) => parse_term(t).map(RuleArg::Term).map_err(parse_err),
            (ArgKind::OptionalVar, Some(t)) => {
                VarId::new(t).map(RuleArg::Var).map_err(|e| KernelError::BadArgument(e.to_string()))
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, RuleArg::None)
    }

    pub fn formula(&self, rule: &str) -> Result<&Formula, KernelError> {
        match self {
            RuleArg::Formula(f) => Ok(f),
            _ => Err(KernelError::BadArgument(format!("{rule} needs a formula argument"))),
        }
    }

    pub fn term(&self, rule: &str) -> Result<&Term, KernelError> {
        match self {
            RuleArg::Term(t) => Ok(t),
            _ => Err(KernelError::BadArgument(format!("{rule} needs a term argument"))),
        }
    }
}

impl fmt::Display for RuleArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleArg::None => Ok(()),
            RuleArg::Formula(g) => write!(f, "{g}"),
            RuleArg::Term(t) => write!(f, "{t}"),
            RuleArg::Var(x) => write!(f, "{x}"),
        }
    }
}

/// Result of applying a rule to a goal.
#[derive(Debug, Clone)]
pub enum RuleOutcome {
    /// The goal follows from these premises; none means it is closed.
    /// Derived rules also return the primitive derivation they expanded to.
    Premises { goals: Vec<Sequent>, expansion: Option<Proof> },
    /// The rule applies but could not discharge the goal, which stays open.
    Stuck(String),
}

impl RuleOutcome {
    pub fn premises(goals: Vec<Sequent>) -> Self {
        RuleOutcome::Premises { goals, expansion: None }
    }

    pub fn closed() -> Self {
        RuleOutcome::premises(Vec::new())
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, RuleOutcome::Premises { goals, .. } if goals.is_empty())
    }
}

/// A proof rule or axiom, looked up by name from proof scripts.
pub trait Rule: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn arg_kind(&self) -> ArgKind {
        ArgKind::None
    }
    fn needs_position(&self) -> bool {
        true
    }
    fn apply(
        &self,
        reg: &RuleRegistry,
        goal: &Sequent,
        pos: Option<&Position>,
        arg: &RuleArg,
    ) -> Result<RuleOutcome, KernelError>;
}

#[derive(Clone, Default)]
pub struct RuleRegistry {
    rules: BTreeMap<&'static str, Arc<dyn Rule>>,
    order: Vec<&'static str>,
}

impl RuleRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every axiom and rule of the calculus.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        for r in super::axioms::all() {
            reg.register(r);
        }
        for r in super::rules::all() {
            reg.register(r);
        }
        for r in super::derived::all() {
            reg.register(r);
        }
        reg
    }

    pub fn register(&mut self, rule: Arc<dyn Rule>) {
        let name = rule.name();
        if self.rules.insert(name, rule).is_none() {
            self.order.push(name);
        }
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn Rule>, KernelError> {
        self.rules.get(name).ok_or_else(|| KernelError::UnknownRule(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.rules.contains_key(name)
    }

    /// Rules in registration order.
    pub fn rules(&self) -> impl Iterator<Item = &Arc<dyn Rule>> {
        self.order.iter().map(|n| &self.rules[n])
    }

    pub fn apply(&self, name: &str, goal: &Sequent, pos: Option<&Position>, arg: &RuleArg) -> Result<RuleOutcome, KernelError> {
        let rule = self.get(name)?;
        if rule.needs_position() && pos.is_none() {
            return Err(KernelError::BadPosition(format!("{name} needs a position")));
        }
        rule.apply(self, goal, pos, arg)
    }
}

impl fmt::Debug for RuleRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.order).finish()
    }
}

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::KernelError;
use crate::syntax::{Formula, TraceFormula, VarId};

/// A goal `Γ ⊢ Δ`: the conjunction of the antecedents entails the disjunction
/// of the succedents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub ante: Vec<Formula>,
    pub succ: Vec<Formula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Ante,
    Succ,
}

/// A subformula address such as `R0.1.0`: side, top-level index, then child
/// indices. Binary connectives number their operands 0 and 1; negation and
/// quantifiers have the single child 0; a modality's postcondition is child 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    pub side: Side,
    pub index: usize,
    pub path: Vec<usize>,
}

impl Position {
    pub fn ante(index: usize) -> Self {
        Position { side: Side::Ante, index, path: Vec::new() }
    }

    pub fn succ(index: usize) -> Self {
        Position { side: Side::Succ, index, path: Vec::new() }
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.clone();
        p.path.push(i);
        p
    }

    pub fn is_top_level(&self) -> bool {
        self.path.is_empty()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::Ante => 'L',
            Side::Succ => 'R',
        };
        write!(f, "{s}{}", self.index)?;
        for i in &self.path {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = KernelError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || KernelError::BadPosition(format!("`{text}` is not a position like R0 or L1.0.1"));
        let text = text.trim();
        let side = match text.chars().next() {
            Some('L') => Side::Ante,
            Some('R') => Side::Succ,
            _ => return Err(bad()),
        };
        let mut parts = text[1..].split('.');
        let index = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let path = parts.map(|p| p.parse().map_err(|_| bad())).collect::<Result<Vec<usize>, _>>()?;
        Ok(Position { side, index, path })
    }
}

impl Sequent {
    pub fn new(ante: Vec<Formula>, succ: Vec<Formula>) -> Self {
        Sequent { ante, succ }
    }

    /// `⊢ φ`
    pub fn goal(f: Formula) -> Self {
        Sequent { ante: Vec::new(), succ: vec![f] }
    }

    pub fn side(&self, side: Side) -> &[Formula] {
        match side {
            Side::Ante => &self.ante,
            Side::Succ => &self.succ,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut Vec<Formula> {
        match side {
            Side::Ante => &mut self.ante,
            Side::Succ => &mut self.succ,
        }
    }

    /// Every variable occurring anywhere, bound or free. Fresh names avoid this set.
    pub fn all_vars(&self) -> BTreeSet<VarId> {
        self.ante.iter().chain(&self.succ).flat_map(|f| f.all_vars()).collect()
    }

    pub fn is_first_order(&self) -> bool {
        self.ante.iter().chain(&self.succ).all(Formula::is_first_order)
    }

    pub fn top(&self, side: Side, index: usize) -> Result<&Formula, KernelError> {
        self.side(side).get(index).ok_or_else(|| KernelError::BadPosition(format!("{} has no formula {index}", side_name(side))))
    }

    /// The subformula at `pos`.
    pub fn at(&self, pos: &Position) -> Result<&Formula, KernelError> {
        let mut f = self.top(pos.side, pos.index)?;
        for (depth, &i) in pos.path.iter().enumerate() {
            f = child(f, i).ok_or_else(|| {
                let prefix = Position { path: pos.path[..depth].to_vec(), ..pos.clone() };
                KernelError::BadPosition(format!("`{f}` at {prefix} has no child {i}"))
            })?;
        }
        Ok(f)
    }

    /// Copy with the subformula at `pos` replaced.
    pub fn replace(&self, pos: &Position, new: Formula) -> Result<Sequent, KernelError> {
        let top = self.top(pos.side, pos.index)?;
        let replaced = replace_in(top, &pos.path, new)
            .ok_or_else(|| KernelError::BadPosition(format!("{pos} does not address a subformula of `{top}`")))?;
        let mut out = self.clone();
        out.side_mut(pos.side)[pos.index] = replaced;
        Ok(out)
    }

    /// Copy without the top-level formula at `(side, index)`.
    pub fn remove(&self, side: Side, index: usize) -> Result<Sequent, KernelError> {
        self.top(side, index)?;
        let mut out = self.clone();
        out.side_mut(side).remove(index);
        Ok(out)
    }

    pub fn with_ante(mut self, f: Formula) -> Sequent {
        self.ante.push(f);
        self
    }

    pub fn with_succ(mut self, f: Formula) -> Sequent {
        self.succ.push(f);
        self
    }

    /// Formulas bound around `pos`: quantified variables and variables written by
    /// enclosing programs.
    pub fn binders_at(&self, pos: &Position) -> Result<BTreeSet<VarId>, KernelError> {
        let mut out = BTreeSet::new();
        let mut f = self.top(pos.side, pos.index)?;
        for &i in &pos.path {
            match f {
                Formula::Forall(x, _) | Formula::Exists(x, _) => {
                    out.insert(x.clone());
                }
                Formula::BoxOp(p, _) | Formula::DiamondOp(p, _) => out.extend(crate::syntax::bound_vars(p)),
                _ => {}
            }
            f = child(f, i).ok_or_else(|| KernelError::BadPosition(format!("{pos} is not a valid path")))?;
        }
        Ok(out)
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Ante => "the antecedent",
        Side::Succ => "the succedent",
    }
}

fn child(f: &Formula, i: usize) -> Option<&Formula> {
    match (f, i) {
        (Formula::Not(g), 0) | (Formula::Forall(_, g), 0) | (Formula::Exists(_, g), 0) => Some(g),
        (Formula::And(a, _) | Formula::Or(a, _) | Formula::Imp(a, _) | Formula::Equiv(a, _), 0) => Some(a),
        (Formula::And(_, b) | Formula::Or(_, b) | Formula::Imp(_, b) | Formula::Equiv(_, b), 1) => Some(b),
        (Formula::BoxOp(_, k) | Formula::DiamondOp(_, k), 1) => Some(k.formula()),
        _ => None,
    }
}

fn replace_in(f: &Formula, path: &[usize], new: Formula) -> Option<Formula> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(new);
    };
    let sub = replace_in(child(f, i)?, rest, new)?;
    let bx = Box::new;
    Some(match (f, i) {
        (Formula::Not(_), 0) => Formula::Not(bx(sub)),
        (Formula::Forall(x, _), 0) => Formula::Forall(x.clone(), bx(sub)),
        (Formula::Exists(x, _), 0) => Formula::Exists(x.clone(), bx(sub)),
        (Formula::And(_, b), 0) => Formula::And(bx(sub), b.clone()),
        (Formula::And(a, _), 1) => Formula::And(a.clone(), bx(sub)),
        (Formula::Or(_, b), 0) => Formula::Or(bx(sub), b.clone()),
        (Formula::Or(a, _), 1) => Formula::Or(a.clone(), bx(sub)),
        (Formula::Imp(_, b), 0) => Formula::Imp(bx(sub), b.clone()),
        (Formula::Imp(a, _), 1) => Formula::Imp(a.clone(), bx(sub)),
        (Formula::Equiv(_, b), 0) => Formula::Equiv(bx(sub), b.clone()),
        (Formula::Equiv(a, _), 1) => Formula::Equiv(a.clone(), bx(sub)),
        (Formula::BoxOp(p, k), 1) => Formula::BoxOp(p.clone(), Box::new(retrace(k, sub))),
        (Formula::DiamondOp(p, k), 1) => Formula::DiamondOp(p.clone(), Box::new(retrace(k, sub))),
        _ => return None,
    })
}

fn retrace(k: &TraceFormula, f: Formula) -> TraceFormula {
    match k {
        TraceFormula::State(_) => TraceFormula::State(f),
        TraceFormula::Tae(_) => TraceFormula::Tae(f),
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |fs: &[Formula]| fs.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ");
        let ante = join(&self.ante);
        let succ = join(&self.succ);
        let l = if ante.is_empty() { String::new() } else { format!("{ante} ") };
        let r = if succ.is_empty() { String::new() } else { format!(" {succ}") };
        write!(f, "{l}|-{r}")
    }
}

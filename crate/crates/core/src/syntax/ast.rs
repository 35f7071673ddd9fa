use std::collections::BTreeSet;

use crate::poly::Poly;
use crate::syntax::VarId;

/// Terms are canonical polynomials.
pub type Term = Poly;

/// Comparison of a term against zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }

    pub fn negate(self) -> Cmp {
        match self {
            Cmp::Eq => Cmp::Ne,
            Cmp::Ne => Cmp::Eq,
            Cmp::Lt => Cmp::Ge,
            Cmp::Le => Cmp::Gt,
            Cmp::Gt => Cmp::Le,
            Cmp::Ge => Cmp::Lt,
        }
    }

    /// The comparison obtained by negating the term: `e < 0` iff `-e > 0`.
    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Eq => Cmp::Eq,
            Cmp::Ne => Cmp::Ne,
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Gt => Cmp::Lt,
            Cmp::Ge => Cmp::Le,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Cmp::Eq => ord == Equal,
            Cmp::Ne => ord != Equal,
            Cmp::Lt => ord == Less,
            Cmp::Le => ord != Greater,
            Cmp::Gt => ord == Greater,
            Cmp::Ge => ord != Less,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Cmp::Lt | Cmp::Gt | Cmp::Ne)
    }
}

/// `poly cmp 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub poly: Term,
    pub cmp: Cmp,
}

impl Atom {
    pub fn new(poly: Term, cmp: Cmp) -> Atom {
        Atom { poly, cmp }
    }

    /// `lhs cmp rhs`, stored as `lhs - rhs cmp 0`.
    pub fn compare(lhs: &Term, cmp: Cmp, rhs: &Term) -> Atom {
        Atom { poly: lhs - rhs, cmp }
    }

    /// Truth value when the term is constant.
    pub fn constant_value(&self) -> Option<bool> {
        use num_traits::Zero;
        let c = self.poly.as_constant()?;
        Some(self.cmp.holds(c.cmp(&crate::Rational::zero())))
    }

    pub fn is_true_literal(&self) -> bool {
        self.poly.is_zero() && self.cmp == Cmp::Eq
    }

    pub fn is_false_literal(&self) -> bool {
        self.poly.is_zero() && self.cmp == Cmp::Ne
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Forall(VarId, Box<Formula>),
    Exists(VarId, Box<Formula>),
    BoxOp(Box<Program>, Box<TraceFormula>),
    DiamondOp(Box<Program>, Box<TraceFormula>),
}

/// Postcondition of a modality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TraceFormula {
    State(Formula),
    Tae(Formula),
}

impl TraceFormula {
    pub fn formula(&self) -> &Formula {
        match self {
            TraceFormula::State(f) | TraceFormula::Tae(f) => f,
        }
    }

    pub fn is_tae(&self) -> bool {
        matches!(self, TraceFormula::Tae(_))
    }

    pub fn map(&self, f: impl FnOnce(&Formula) -> Formula) -> TraceFormula {
        match self {
            TraceFormula::State(g) => TraceFormula::State(f(g)),
            TraceFormula::Tae(g) => TraceFormula::Tae(f(g)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OdeSystem {
    pub eqs: Vec<(VarId, Term)>,
    pub domain: Formula,
}

impl OdeSystem {
    pub fn new(eqs: Vec<(VarId, Term)>, domain: Formula) -> OdeSystem {
        OdeSystem { eqs, domain }
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.eqs.iter().map(|(x, _)| x)
    }

    pub fn rhs(&self, x: &VarId) -> Option<&Term> {
        self.eqs.iter().find(|(y, _)| y == x).map(|(_, e)| e)
    }

    pub fn has_domain(&self) -> bool {
        !matches!(&self.domain, Formula::Atom(a) if a.is_true_literal())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Program {
    Assign(VarId, Term),
    Test(Formula),
    Ode(OdeSystem),
    Choice(Box<Program>, Box<Program>),
    Seq(Box<Program>, Box<Program>),
    Loop(Box<Program>),
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::Atom(Atom::new(Poly::zero(), Cmp::Eq))
    }

    pub fn ff() -> Formula {
        Formula::Atom(Atom::new(Poly::zero(), Cmp::Ne))
    }

    pub fn atom(poly: Term, cmp: Cmp) -> Formula {
        Formula::Atom(Atom::new(poly, cmp))
    }

    /// `lhs cmp rhs`.
    pub fn cmp(lhs: &Term, cmp: Cmp, rhs: &Term) -> Formula {
        Formula::Atom(Atom::compare(lhs, cmp, rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Formula {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    pub fn forall(x: VarId, f: Formula) -> Formula {
        Formula::Forall(x, Box::new(f))
    }

    pub fn exists(x: VarId, f: Formula) -> Formula {
        Formula::Exists(x, Box::new(f))
    }

    pub fn boxed(p: Program, post: TraceFormula) -> Formula {
        Formula::BoxOp(Box::new(p), Box::new(post))
    }

    pub fn diamond(p: Program, post: TraceFormula) -> Formula {
        Formula::DiamondOp(Box::new(p), Box::new(post))
    }

    /// `[p] φ`.
    pub fn box_state(p: Program, f: Formula) -> Formula {
        Formula::boxed(p, TraceFormula::State(f))
    }

    /// `[p] tae: φ`.
    pub fn box_tae(p: Program, f: Formula) -> Formula {
        Formula::boxed(p, TraceFormula::Tae(f))
    }

    /// Conjunction of a list, `true` when empty.
    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::tt(),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list, `false` when empty.
    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::ff(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self, Formula::Atom(a) if a.is_true_literal())
    }

    pub fn is_false_literal(&self) -> bool {
        matches!(self, Formula::Atom(a) if a.is_false_literal())
    }

    /// No modalities anywhere.
    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => f.is_first_order(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Equiv(a, b) => {
                a.is_first_order() && b.is_first_order()
            }
            Formula::BoxOp(..) | Formula::DiamondOp(..) => false,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Equiv(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::BoxOp(p, k) | Formula::DiamondOp(p, k) => p.is_quantifier_free() && k.formula().is_quantifier_free(),
        }
    }

    /// Rewrites ∨, →, ↔ in terms of ¬ and ∧, everywhere including inside programs.
    pub fn expand_connectives(&self) -> Formula {
        let e = Formula::expand_connectives;
        match self {
            Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(e(f)),
            Formula::And(a, b) => Formula::and(e(a), e(b)),
            Formula::Or(a, b) => Formula::not(Formula::and(Formula::not(e(a)), Formula::not(e(b)))),
            Formula::Imp(a, b) => Formula::not(Formula::and(e(a), Formula::not(e(b)))),
            Formula::Equiv(a, b) => {
                let (a, b) = (e(a), e(b));
                Formula::and(
                    Formula::not(Formula::and(a.clone(), Formula::not(b.clone()))),
                    Formula::not(Formula::and(b, Formula::not(a))),
                )
            }
            Formula::Forall(x, f) => Formula::forall(x.clone(), e(f)),
            Formula::Exists(x, f) => Formula::exists(x.clone(), e(f)),
            Formula::BoxOp(p, k) => Formula::boxed(p.expand_connectives(), k.map(e)),
            Formula::DiamondOp(p, k) => Formula::diamond(p.expand_connectives(), k.map(e)),
        }
    }

    /// Every atom, in left-to-right order, including those inside programs.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Equiv(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::BoxOp(p, k) | Formula::DiamondOp(p, k) => {
                p.collect_atoms(out);
                k.formula().collect_atoms(out);
            }
        }
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Formula::Atom(a) => out.extend(a.poly.vars()),
            Formula::Not(f) => f.collect_all_vars(out),
            Formula::Forall(x, f) | Formula::Exists(x, f) => {
                out.insert(x.clone());
                f.collect_all_vars(out);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Equiv(a, b) => {
                a.collect_all_vars(out);
                b.collect_all_vars(out);
            }
            Formula::BoxOp(p, k) | Formula::DiamondOp(p, k) => {
                out.extend(p.all_vars());
                k.formula().collect_all_vars(out);
            }
        }
    }

    /// Negation with double negations and literal constants folded.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::Not(f) => (**f).clone(),
            Formula::Atom(a) if a.poly.is_zero() => Formula::atom(Poly::zero(), a.cmp.negate()),
            _ => Formula::not(self.clone()),
        }
    }

    /// Negation normal form for first-order formulas: negations pushed onto atoms
    /// (and absorbed by flipping comparisons), → and ↔ removed.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, pos: bool) -> Formula {
        match (self, pos) {
            (Formula::Atom(a), true) => Formula::Atom(a.clone()),
            (Formula::Atom(a), false) => Formula::atom(a.poly.clone(), a.cmp.negate()),
            (Formula::Not(f), _) => f.nnf_signed(!pos),
            (Formula::And(a, b), true) => Formula::and(a.nnf_signed(true), b.nnf_signed(true)),
            (Formula::And(a, b), false) => Formula::or(a.nnf_signed(false), b.nnf_signed(false)),
            (Formula::Or(a, b), true) => Formula::or(a.nnf_signed(true), b.nnf_signed(true)),
            (Formula::Or(a, b), false) => Formula::and(a.nnf_signed(false), b.nnf_signed(false)),
            (Formula::Imp(a, b), true) => Formula::or(a.nnf_signed(false), b.nnf_signed(true)),
            (Formula::Imp(a, b), false) => Formula::and(a.nnf_signed(true), b.nnf_signed(false)),
            (Formula::Equiv(a, b), true) => Formula::or(
                Formula::and(a.nnf_signed(true), b.nnf_signed(true)),
                Formula::and(a.nnf_signed(false), b.nnf_signed(false)),
            ),
            (Formula::Equiv(a, b), false) => Formula::or(
                Formula::and(a.nnf_signed(true), b.nnf_signed(false)),
                Formula::and(a.nnf_signed(false), b.nnf_signed(true)),
            ),
            (Formula::Forall(x, f), true) => Formula::forall(x.clone(), f.nnf_signed(true)),
            (Formula::Forall(x, f), false) => Formula::exists(x.clone(), f.nnf_signed(false)),
            (Formula::Exists(x, f), true) => Formula::exists(x.clone(), f.nnf_signed(true)),
            (Formula::Exists(x, f), false) => Formula::forall(x.clone(), f.nnf_signed(false)),
            (Formula::BoxOp(..) | Formula::DiamondOp(..), true) => self.clone(),
            (Formula::BoxOp(..) | Formula::DiamondOp(..), false) => Formula::not(self.clone()),
        }
    }
}

impl Program {
    pub fn assign(x: VarId, e: Term) -> Program {
        Program::Assign(x, e)
    }

    pub fn test(f: Formula) -> Program {
        Program::Test(f)
    }

    pub fn ode(eqs: Vec<(VarId, Term)>, domain: Formula) -> Program {
        Program::Ode(OdeSystem::new(eqs, domain))
    }

    pub fn choice(a: Program, b: Program) -> Program {
        Program::Choice(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn looped(a: Program) -> Program {
        Program::Loop(Box::new(a))
    }

    pub fn is_loop_free(&self) -> bool {
        match self {
            Program::Assign(..) | Program::Test(_) | Program::Ode(_) => true,
            Program::Choice(a, b) | Program::Seq(a, b) => a.is_loop_free() && b.is_loop_free(),
            Program::Loop(_) => false,
        }
    }

    pub fn contains_ode(&self) -> bool {
        match self {
            Program::Assign(..) | Program::Test(_) => false,
            Program::Ode(_) => true,
            Program::Choice(a, b) | Program::Seq(a, b) => a.contains_ode() || b.contains_ode(),
            Program::Loop(a) => a.contains_ode(),
        }
    }

    fn is_quantifier_free(&self) -> bool {
        match self {
            Program::Assign(..) => true,
            Program::Test(f) => f.is_quantifier_free(),
            Program::Ode(o) => o.domain.is_quantifier_free(),
            Program::Choice(a, b) | Program::Seq(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Program::Loop(a) => a.is_quantifier_free(),
        }
    }

    pub fn expand_connectives(&self) -> Program {
        match self {
            Program::Assign(..) => self.clone(),
            Program::Test(f) => Program::Test(f.expand_connectives()),
            Program::Ode(o) => Program::Ode(OdeSystem::new(o.eqs.clone(), o.domain.expand_connectives())),
            Program::Choice(a, b) => Program::choice(a.expand_connectives(), b.expand_connectives()),
            Program::Seq(a, b) => Program::seq(a.expand_connectives(), b.expand_connectives()),
            Program::Loop(a) => Program::looped(a.expand_connectives()),
        }
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Program::Assign(..) => {}
            Program::Test(f) => f.collect_atoms(out),
            Program::Ode(o) => o.domain.collect_atoms(out),
            Program::Choice(a, b) | Program::Seq(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Program::Loop(a) => a.collect_atoms(out),
        }
    }

    /// Variables occurring anywhere in the program.
    pub fn all_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        match self {
            Program::Assign(x, e) => {
                out.insert(x.clone());
                out.extend(e.vars());
            }
            Program::Test(f) => out.extend(f.all_vars()),
            Program::Ode(o) => {
                for (x, e) in &o.eqs {
                    out.insert(x.clone());
                    out.extend(e.vars());
                }
                out.extend(o.domain.all_vars());
            }
            Program::Choice(a, b) | Program::Seq(a, b) => {
                out.extend(a.all_vars());
                out.extend(b.all_vars());
            }
            Program::Loop(a) => out.extend(a.all_vars()),
        }
        out
    }
}

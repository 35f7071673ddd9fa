use std::fmt;

use num_traits::Signed;

use super::ast::{Atom, Formula, OdeSystem, Program, TraceFormula};
use crate::poly::Poly;

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_true_literal() {
            return f.write_str("true");
        }
        if self.is_false_literal() {
            return f.write_str("false");
        }
        let (mut pos, mut neg) = (Poly::zero(), Poly::zero());
        for (m, c) in self.poly.terms() {
            let t = Poly::monomial(m.clone(), c.abs());
            if c.is_negative() {
                neg = neg + t;
            } else {
                pos = pos + t;
            }
        }
        write!(f, "{pos} {} {neg}", self.cmp.symbol())
    }
}

// Precedence levels, loosest first.
const EQUIV: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Equiv(..) => EQUIV,
        Formula::Imp(..) => IMP,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) < min {
        out.write_str("(")?;
        write_formula(f, 0, out)?;
        return out.write_str(")");
    }
    match f {
        Formula::Atom(a) => write!(out, "{a}"),
        Formula::Not(g) => {
            out.write_str("!")?;
            write_operand(g, out)
        }
        Formula::And(a, b) => binary(a, " & ", b, AND, UNARY, out),
        Formula::Or(a, b) => binary(a, " | ", b, OR, AND, out),
        Formula::Imp(a, b) => binary(a, " -> ", b, OR, IMP, out),
        Formula::Equiv(a, b) => binary(a, " <-> ", b, IMP, EQUIV, out),
        Formula::Forall(x, g) => {
            write!(out, "forall {x} ")?;
            write_operand(g, out)
        }
        Formula::Exists(x, g) => {
            write!(out, "exists {x} ")?;
            write_operand(g, out)
        }
        Formula::BoxOp(p, k) => {
            write!(out, "[{p}] ")?;
            write_post(k, out)
        }
        Formula::DiamondOp(p, k) => {
            write!(out, "<{p}> ")?;
            write_post(k, out)
        }
    }
}

fn binary(a: &Formula, op: &str, b: &Formula, lmin: u8, rmin: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    write_formula(a, lmin, out)?;
    out.write_str(op)?;
    write_formula(b, rmin, out)
}

/// Operand of `!` and quantifiers: atoms get parentheses for readability.
fn write_operand(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::Atom(a) if !a.is_true_literal() && !a.is_false_literal() => write!(out, "({a})"),
        _ => write_formula(f, UNARY, out),
    }
}

fn write_post(k: &TraceFormula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match k {
        TraceFormula::State(g) => write_formula(g, UNARY, out),
        TraceFormula::Tae(g) => {
            out.write_str("tae: ")?;
            write_formula(g, UNARY, out)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, 0, f)
    }
}

impl fmt::Display for TraceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceFormula::State(g) => write!(f, "{g}"),
            TraceFormula::Tae(g) => {
                f.write_str("tae: ")?;
                write_formula(g, UNARY, f)
            }
        }
    }
}

impl fmt::Display for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, e)) in self.eqs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}'={e}")?;
        }
        if self.has_domain() {
            write!(f, " & {}", self.domain)?;
        }
        f.write_str("}")
    }
}

fn write_program(p: &Program, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        Program::Assign(x, e) => write!(out, "{x} := {e}"),
        Program::Test(g) if g.is_true_literal() || g.is_false_literal() => write!(out, "?{g}"),
        Program::Test(g) => write!(out, "?({g})"),
        Program::Ode(o) => write!(out, "{o}"),
        Program::Choice(a, b) => {
            wrap(a, matches!(**a, Program::Seq(..)), out)?;
            out.write_str(" ++ ")?;
            wrap(b, matches!(**b, Program::Seq(..) | Program::Choice(..)), out)
        }
        Program::Seq(a, b) => {
            wrap(a, matches!(**a, Program::Choice(..)), out)?;
            out.write_str("; ")?;
            wrap(b, matches!(**b, Program::Seq(..) | Program::Choice(..)), out)
        }
        Program::Loop(a) => match &**a {
            Program::Ode(o) => write!(out, "{o}*"),
            _ => {
                out.write_str("{")?;
                write_program(a, out)?;
                out.write_str("}*")
            }
        },
    }
}

fn wrap(p: &Program, parens: bool, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        out.write_str("(")?;
        write_program(p, out)?;
        out.write_str(")")
    } else {
        write_program(p, out)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_program(self, f)
    }
}

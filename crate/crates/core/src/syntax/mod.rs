//! Terms, hybrid programs and formulas: AST, concrete syntax and substitution.
//!
//! Concrete syntax, loosest binding first:
//!
//! ```text
//! formula  := φ <-> φ | φ -> φ | φ | φ | φ & φ | !φ | forall x φ | exists x φ
//!           | [α] post | <α> post | term cmp term | true | false | (φ)
//! post     := tae: φ | φ
//! program  := α ++ α | α; α | α* | x := term | ?φ | {x'=f, ... & R} | {α} | (α)
//! cmp      := = | != | < | <= | > | >=
//! ```
//!
//! `->` and `<->` associate to the right, the other binary operators to the left.

mod ast;
mod parser;
mod printer;
mod subst;
mod var;
mod vars;

pub use ast::{Atom, Cmp, Formula, OdeSystem, Program, Term, TraceFormula};
pub use parser::{
    parse_decimal, parse_model, parse_ode, parse_program, parse_rational, parse_state_formula, parse_term, Model, ParseError,
    ParseErrorKind,
};
pub use subst::{rename_free, substitute, SubstError};
pub use var::{is_valid_name, InvalidVarId, VarId, KEYWORDS};
pub use vars::{bound_vars, free_vars, must_bound_vars, program_free_vars};

/// Printed form of any syntax node.
pub fn pretty_print(node: &dyn std::fmt::Display) -> String {
    node.to_string()
}

#[cfg(test)]
mod tests;

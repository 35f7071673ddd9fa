use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ast::{Cmp, Formula, OdeSystem, Program, Term, TraceFormula};
use super::VarId;
use crate::poly::Poly;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Malformed input.
    Syntax,
    /// A construct used where the grammar does not allow it, or a variable
    /// that the model does not declare.
    Unbound,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    True,
    False,
    Forall,
    Exists,
    Tae,
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Colon,
    Choice,
    Assign,
    Question,
    Amp,
    Bar,
    Bang,
    Arrow,
    DArrow,
    Rel(Cmp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(_) => "number".into(),
            Tok::Eof => "end of input".into(),
            Tok::Rel(c) => format!("`{}`", c.symbol()),
            other => format!("`{}`", tok_text(other)),
        }
    }
}

fn tok_text(t: &Tok) -> &'static str {
    match t {
        Tok::True => "true",
        Tok::False => "false",
        Tok::Forall => "forall",
        Tok::Exists => "exists",
        Tok::Tae => "tae",
        Tok::Prime => "'",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Caret => "^",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LBrack => "[",
        Tok::RBrack => "]",
        Tok::Comma => ",",
        Tok::Semi => ";",
        Tok::Colon => ":",
        Tok::Choice => "++",
        Tok::Assign => ":=",
        Tok::Question => "?",
        Tok::Amp => "&",
        Tok::Bar => "|",
        Tok::Bang => "!",
        Tok::Arrow => "->",
        Tok::DArrow => "<->",
        _ => "",
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError { kind: ParseErrorKind::Syntax, line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let at = |k: usize| chars.get(i + k).copied();
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while at(adv).is_some_and(|d| d.is_ascii_alphanumeric() || d == '_') {
                    adv += 1;
                }
                let word: String = chars[start..start + adv].iter().collect();
                match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    "tae" => Tok::Tae,
                    _ => Tok::Ident(word),
                }
            }
            c if c.is_ascii_digit() || (c == '.' && at(1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                while at(adv).is_some_and(|d| d.is_ascii_digit()) {
                    adv += 1;
                }
                if c != '.' && at(adv) == Some('.') && at(adv + 1).is_some_and(|d| d.is_ascii_digit()) {
                    adv += 1;
                }
                while at(adv).is_some_and(|d| d.is_ascii_digit()) {
                    adv += 1;
                }
                let text: String = chars[start..start + adv].iter().collect();
                Tok::Num(parse_decimal(&text).ok_or_else(|| err(l0, c0, format!("bad number `{text}`")))?)
            }
            '\'' => Tok::Prime,
            '+' if at(1) == Some('+') => {
                adv = 2;
                Tok::Choice
            }
            '+' => Tok::Plus,
            '-' if at(1) == Some('>') => {
                adv = 2;
                Tok::Arrow
            }
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' if at(1) == Some('=') => {
                adv = 2;
                Tok::Assign
            }
            ':' => Tok::Colon,
            '?' => Tok::Question,
            '&' if at(1) == Some('&') => {
                adv = 2;
                Tok::Amp
            }
            '&' | '∧' => Tok::Amp,
            '|' if at(1) == Some('|') => {
                adv = 2;
                Tok::Bar
            }
            '|' | '∨' => Tok::Bar,
            '!' if at(1) == Some('=') => {
                adv = 2;
                Tok::Rel(Cmp::Ne)
            }
            '!' | '¬' => Tok::Bang,
            '<' if at(1) == Some('-') && at(2) == Some('>') => {
                adv = 3;
                Tok::DArrow
            }
            '<' if at(1) == Some('=') => {
                adv = 2;
                Tok::Rel(Cmp::Le)
            }
            '<' => Tok::Rel(Cmp::Lt),
            '>' if at(1) == Some('=') => {
                adv = 2;
                Tok::Rel(Cmp::Ge)
            }
            '>' => Tok::Rel(Cmp::Gt),
            '=' if at(1) == Some('=') => {
                adv = 2;
                Tok::Rel(Cmp::Eq)
            }
            '=' => Tok::Rel(Cmp::Eq),
            '≤' => Tok::Rel(Cmp::Le),
            '≥' => Tok::Rel(Cmp::Ge),
            '≠' => Tok::Rel(Cmp::Ne),
            '→' => Tok::Arrow,
            '↔' => Tok::DArrow,
            '∪' => Tok::Choice,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, line: l0, column: c0 });
        i += adv;
        col += adv;
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// `12`, `0.5`, `.5`.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(n, d))
}

/// Parses a rational written as an integer, decimal or fraction (`-3/4`).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r.trim()),
        None => (false, t),
    };
    let q = match t.split_once('/') {
        Some((a, b)) => {
            let d = parse_decimal(b.trim())?;
            if d.is_zero() {
                return None;
            }
            parse_decimal(a.trim())? / d
        }
        None => parse_decimal(t)?,
    };
    Some(if neg { -q } else { q })
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&self, kind: ParseErrorKind, message: String) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { kind, line: s.line, column: s.column, message }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error_here(ParseErrorKind::Syntax, format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", tok_text(&t))))
        }
    }

    fn expect_end(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn ident(&mut self) -> PResult<VarId> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let v = VarId::new(&name).map_err(|e| self.error_here(ParseErrorKind::Syntax, e.to_string()))?;
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected("variable")),
        }
    }

    // ---- terms ----

    fn term(&mut self) -> PResult<Term> {
        let mut acc = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc + self.product()?;
            } else if self.eat(&Tok::Minus) {
                acc = acc - self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_factor(t: &Tok) -> bool {
        matches!(t, Tok::Ident(_) | Tok::Num(_) | Tok::LParen | Tok::Minus)
    }

    fn product(&mut self) -> PResult<Term> {
        let mut acc = self.unary_term()?;
        loop {
            if *self.peek() == Tok::Star && Self::starts_factor(self.peek_at(1)) {
                self.bump();
                acc = acc * self.unary_term()?;
            } else if *self.peek() == Tok::Slash {
                self.bump();
                let d = self.unary_term()?;
                match d.as_constant() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&(Rational::one() / c)),
                    _ => return Err(self.error_here(ParseErrorKind::Syntax, "division only by nonzero constants".into())),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary_term(&mut self) -> PResult<Term> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.unary_term()?);
        }
        let base = self.atom_term()?;
        if self.eat(&Tok::Caret) {
            match self.bump() {
                Tok::Num(q) if q.is_integer() && q >= Rational::zero() => {
                    let n: u32 = q
                        .to_integer()
                        .try_into()
                        .map_err(|_| self.error_here(ParseErrorKind::Syntax, "exponent too large".into()))?;
                    Ok(base.pow(n))
                }
                _ => Err(self.error_here(ParseErrorKind::Syntax, "exponent must be a natural number".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom_term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(Poly::constant(q))
            }
            Tok::Ident(_) => Ok(Poly::var(&self.ident()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.unexpected("term")),
        }
    }

    // ---- formulas ----

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.implication()?;
        if self.eat(&Tok::DArrow) {
            Ok(Formula::equiv(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            Ok(Formula::imp(lhs, self.implication()?))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Amp) {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Forall | Tok::Exists => {
                let q = self.bump();
                let x = self.ident()?;
                let body = self.unary()?;
                Ok(if q == Tok::Forall { Formula::forall(x, body) } else { Formula::exists(x, body) })
            }
            Tok::LBrack => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::boxed(p, self.post()?))
            }
            Tok::Rel(Cmp::Lt) => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::Rel(Cmp::Gt))?;
                Ok(Formula::diamond(p, self.post()?))
            }
            _ => self.primary(),
        }
    }

    fn post(&mut self) -> PResult<TraceFormula> {
        if self.eat(&Tok::Tae) {
            self.expect(Tok::Colon)?;
            Ok(TraceFormula::Tae(self.unary()?))
        } else {
            Ok(TraceFormula::State(self.unary()?))
        }
    }

    fn primary(&mut self) -> PResult<Formula> {
        match self.peek() {
            Tok::True => {
                self.bump();
                return Ok(Formula::tt());
            }
            Tok::False => {
                self.bump();
                return Ok(Formula::ff());
            }
            _ => {}
        }
        let save = self.pos;
        match self.comparison() {
            Ok(f) => Ok(f),
            Err(term_err) => {
                self.pos = save;
                if self.eat(&Tok::LParen) {
                    let f = self.formula()?;
                    self.expect(Tok::RParen)?;
                    Ok(f)
                } else {
                    Err(term_err)
                }
            }
        }
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        let cmp = match self.peek() {
            Tok::Rel(c) => *c,
            _ => return Err(self.unexpected("comparison")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::cmp(&lhs, cmp, &rhs))
    }

    fn first_order(&mut self, what: &str) -> PResult<Formula> {
        let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
        let f = self.formula()?;
        if !f.is_first_order() {
            return Err(ParseError {
                kind: ParseErrorKind::Unbound,
                line,
                column,
                message: format!("{what} must not contain modalities"),
            });
        }
        Ok(f)
    }

    // ---- programs ----

    fn program(&mut self) -> PResult<Program> {
        let mut acc = self.sequence()?;
        while self.eat(&Tok::Choice) {
            acc = Program::choice(acc, self.sequence()?);
        }
        Ok(acc)
    }

    fn sequence(&mut self) -> PResult<Program> {
        let mut acc = self.repetition()?;
        while self.eat(&Tok::Semi) {
            acc = Program::seq(acc, self.repetition()?);
        }
        Ok(acc)
    }

    fn repetition(&mut self) -> PResult<Program> {
        let mut p = self.program_atom()?;
        while self.eat(&Tok::Star) {
            p = Program::looped(p);
        }
        Ok(p)
    }

    fn program_atom(&mut self) -> PResult<Program> {
        match self.peek().clone() {
            Tok::Ident(_) => {
                let x = self.ident()?;
                self.expect(Tok::Assign)?;
                Ok(Program::Assign(x, self.term()?))
            }
            Tok::Question => {
                self.bump();
                Ok(Program::Test(self.test_formula()?))
            }
            Tok::LParen => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::LBrace => {
                self.bump();
                let p = if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Prime {
                    Program::Ode(self.ode_body()?)
                } else {
                    self.program()?
                };
                self.expect(Tok::RBrace)?;
                Ok(p)
            }
            _ => Err(self.unexpected("program")),
        }
    }

    /// A test body: a conjunction-level formula so that `?a & b; c` stops at `;`,
    /// while connectives of lower precedence need parentheses.
    fn test_formula(&mut self) -> PResult<Formula> {
        let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
        let f = self.formula()?;
        if !f.is_first_order() {
            return Err(ParseError {
                kind: ParseErrorKind::Unbound,
                line,
                column,
                message: "tests must not contain modalities".into(),
            });
        }
        Ok(f)
    }

    fn ode_body(&mut self) -> PResult<OdeSystem> {
        let mut eqs: Vec<(VarId, Term)> = Vec::new();
        loop {
            let x = self.ident()?;
            if eqs.iter().any(|(y, _)| *y == x) {
                return Err(self.error_here(ParseErrorKind::Syntax, format!("`{x}` has two differential equations")));
            }
            self.expect(Tok::Prime)?;
            self.expect(Tok::Rel(Cmp::Eq))?;
            eqs.push((x, self.term()?));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let domain = if self.eat(&Tok::Amp) { self.first_order("evolution domains")? } else { Formula::tt() };
        Ok(OdeSystem::new(eqs, domain))
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.expect_end()?;
    Ok(t)
}

pub fn parse_state_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.expect_end()?;
    Ok(f)
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let prog = p.program()?;
    p.expect_end()?;
    Ok(prog)
}

/// ODE system written as `{x'=f, ... & R}` or without braces.
pub fn parse_ode(text: &str) -> Result<OdeSystem, ParseError> {
    let mut p = Parser::new(text)?;
    let braced = p.eat(&Tok::LBrace);
    let sys = p.ode_body()?;
    if braced {
        p.expect(Tok::RBrace)?;
    }
    p.expect_end()?;
    Ok(sys)
}

/// A `.pdtl` model: declared variables and one problem formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub vars: Vec<VarId>,
    pub problem: Formula,
}

/// Parses the `vars:` / `problem:` sections of a model file.
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    let mut section: Option<&str> = None;
    let mut vars_text = String::new();
    let mut problem_text = String::new();
    let mut problem_line = 0;
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        let header = ["vars:", "problem:"].into_iter().find(|h| trimmed.starts_with(h));
        let body = match header {
            Some(h) => {
                if !seen.insert(h) {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax,
                        line: i + 1,
                        column: 1,
                        message: format!("duplicate section `{h}`"),
                    });
                }
                section = Some(h);
                if h == "problem:" {
                    problem_line = i;
                }
                &trimmed[h.len()..]
            }
            None => trimmed,
        };
        match section {
            Some("vars:") => {
                vars_text.push(' ');
                vars_text.push_str(body);
            }
            Some(_) => {
                problem_text.push_str(body);
                problem_text.push('\n');
            }
            None if !trimmed.is_empty() => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax,
                    line: i + 1,
                    column: 1,
                    message: "expected `vars:` or `problem:` section".into(),
                })
            }
            None => {}
        }
    }
    if !seen.contains("problem:") {
        return Err(ParseError {
            kind: ParseErrorKind::Syntax,
            line: 1,
            column: 1,
            message: "missing `problem:` section".into(),
        });
    }
    let mut vars = Vec::new();
    for name in vars_text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        let v = VarId::new(name).map_err(|e| ParseError {
            kind: ParseErrorKind::Syntax,
            line: 1,
            column: 1,
            message: e.to_string(),
        })?;
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let problem = parse_state_formula(&problem_text).map_err(|mut e| {
        e.line += problem_line;
        e
    })?;
    if seen.contains("vars:") {
        let declared: BTreeSet<&VarId> = vars.iter().collect();
        if let Some(v) = super::free_vars(&problem).iter().find(|v| !declared.contains(v)) {
            return Err(ParseError {
                kind: ParseErrorKind::Unbound,
                line: problem_line + 1,
                column: 1,
                message: format!("variable `{v}` is not declared in `vars:`"),
            });
        }
    }
    Ok(Model { vars, problem })
}

use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::poly::{rat, ratio, Poly};

fn v(s: &str) -> VarId {
    VarId::named(s)
}

fn pv(s: &str) -> Poly {
    Poly::var(&v(s))
}

fn f(s: &str) -> Formula {
    parse_state_formula(s).unwrap()
}

fn p(s: &str) -> Program {
    parse_program(s).unwrap()
}

const TRAIN: &str = "((?(v<100); a:=1) ++ (?(v=100); a:=-1)); {x'=v, v'=a & 0<=v & v<=100}";

#[test]
fn train_program_structure() {
    let prog = p(TRAIN);
    let Program::Seq(ctrl, plant) = &prog else { panic!("not a sequence: {prog:?}") };
    let Program::Choice(l, r) = &**ctrl else { panic!("not a choice") };
    for branch in [l, r] {
        let Program::Seq(t, a) = &**branch else { panic!("branch not a sequence") };
        assert!(matches!(**t, Program::Test(_)));
        assert!(matches!(**a, Program::Assign(..)));
    }
    let Program::Ode(sys) = &**plant else { panic!("not an ODE") };
    assert_eq!(sys.eqs.len(), 2);
    assert_eq!(sys.eqs[0], (v("x"), pv("v")));
    assert_eq!(sys.eqs[1], (v("v"), pv("a")));
}

#[test]
fn train_program_prints_like_the_model_display() {
    let printed = p(TRAIN).to_string();
    assert_eq!(printed, "((?(v < 100); a := 1) ++ (?(v = 100); a := -1)); {x'=v, v'=a & 0 <= v & v <= 100}");
    let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    assert_eq!(squash(&printed), squash(TRAIN));
}

#[test]
fn unit_test_program() {
    assert_eq!(p("?true"), Program::Test(Formula::tt()));
    assert_eq!(p("?true").to_string(), "?true");
}

#[test]
fn assignment_then_loop() {
    let prog = p("x:=5; {x:=x+1}*");
    assert_eq!(
        prog,
        Program::seq(Program::assign(v("x"), Poly::int(5)), Program::looped(Program::assign(v("x"), pv("x") + Poly::one())))
    );
    assert_eq!(prog.to_string(), "x := 5; {x := x + 1}*");
}

#[test]
fn circle_atom() {
    let g = f("x^2 + y^2 < 1");
    assert_eq!(g, Formula::atom(pv("x").pow(2) + pv("y").pow(2) - Poly::one(), Cmp::Lt));
    assert_eq!(g.to_string(), "x^2 + y^2 < 1");
}

#[test]
fn true_is_trivial_atom() {
    assert_eq!(f("true"), Formula::atom(Poly::zero(), Cmp::Eq));
    assert_eq!(f("false"), Formula::atom(Poly::zero(), Cmp::Ne));
}

#[test]
fn box_over_assignment_round_trips() {
    let g = f("[a:=1] v<100");
    assert_eq!(g, Formula::box_state(Program::assign(v("a"), Poly::one()), f("v < 100")));
    assert_eq!(g.to_string(), "[a := 1] v < 100");
    assert_eq!(f(&g.to_string()), g);
}

#[test]
fn atom_prints_with_positive_sides() {
    assert_eq!(Formula::atom(pv("v") - Poly::int(100), Cmp::Lt).to_string(), "v < 100");
    assert_eq!(f("0 <= v").to_string(), "0 <= v");
    assert_eq!(f("x = 1/2").to_string(), "x = 1/2");
    assert_eq!(f("x >= .5").to_string(), "x >= 1/2");
}

#[test]
fn decimals_and_fractions_are_exact() {
    assert_eq!(parse_term("0.25").unwrap(), Poly::constant(ratio(1, 4)));
    assert_eq!(parse_term(".5*s^2").unwrap(), pv("s").pow(2).scale(&ratio(1, 2)));
    assert_eq!(parse_term("x/4").unwrap(), pv("x").scale(&ratio(1, 4)));
    assert_eq!(parse_rational("-3/4"), Some(ratio(-3, 4)));
    assert!(parse_term("x/y").is_err());
}

#[test]
fn tae_postcondition() {
    let g = f("a=0 & v=0 -> [{x:=1}*] tae: v<100");
    let Formula::Imp(_, b) = &g else { panic!() };
    let Formula::BoxOp(_, k) = &**b else { panic!() };
    assert!(k.is_tae());
    assert_eq!(f(&g.to_string()), g);
}

#[test]
fn precedence() {
    assert_eq!(f("!a>0 & b>0 | c>0 -> d>0 <-> e>0").to_string(), "!(a > 0) & b > 0 | c > 0 -> d > 0 <-> e > 0");
    assert_eq!(f("a>0 -> b>0 -> c>0"), Formula::imp(f("a>0"), Formula::imp(f("b>0"), f("c>0"))));
    assert_eq!(p("a:=1; b:=1 ++ c:=1"), Program::choice(p("a:=1; b:=1"), p("c:=1")));
    assert_eq!(p("a:=1; b:=1*"), Program::seq(p("a:=1"), Program::looped(p("b:=1"))));
    assert_eq!(p("x:=x*2"), Program::assign(v("x"), pv("x").scale(&rat(2))));
}

#[test]
fn unicode_operators() {
    assert_eq!(f("∀x (x ≥ 0 ∧ ¬(x ≠ 1))"), f("forall x (x >= 0 & !(x != 1))"));
    assert_eq!(p("a:=1 ∪ a:=2"), p("a:=1 ++ a:=2"));
}

#[test]
fn errors_carry_positions() {
    let e = parse_state_formula("x <\n  < 2").unwrap_err();
    assert_eq!((e.line, e.column), (2, 3));
    assert_eq!(e.kind, ParseErrorKind::Syntax);
    let e = parse_program("?([x:=1] x > 0)").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Unbound);
    let e = parse_program("{x'=1 & [x:=1] x>0}").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Unbound);
    assert!(parse_program("{x'=1, x'=2}").is_err());
    assert!(parse_state_formula("x < 1 )").is_err());
    assert!(parse_state_formula("tae < 1").is_err());
}

#[test]
fn model_files() {
    let m = parse_model("# comment\nvars: a, v, x\nproblem:\n  a=0 & v=0 ->\n  [x:=1] tae: v<100\n").unwrap();
    assert_eq!(m.vars, vec![v("a"), v("v"), v("x")]);
    assert!(matches!(m.problem, Formula::Imp(..)));
    let e = parse_model("vars: a\nproblem: b > 0\n").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Unbound);
    let e = parse_model("vars: a\nproblem:\n  a >\n").unwrap_err();
    assert_eq!(e.line, 4);
    assert!(parse_model("vars: a\n").is_err());
}

#[test]
fn free_variables() {
    assert_eq!(free_vars(&f("v < 100")), BTreeSet::from([v("v")]));
    assert_eq!(free_vars(&f("forall x (x < y)")), BTreeSet::from([v("y")]));
    let train = f(&format!("a=0 & v=0 -> [{{{TRAIN}}}*] tae: v<100"));
    assert_eq!(free_vars(&train), BTreeSet::from([v("a"), v("v"), v("x")]));
    // assignment shadows the postcondition read
    assert_eq!(free_vars(&f("[x := y] x > 0")), BTreeSet::from([v("y")]));
    assert_eq!(free_vars(&f("[x := y] tae: x > 0")), BTreeSet::from([v("x"), v("y")]));
    assert_eq!(bound_vars(&p(TRAIN)), BTreeSet::from([v("a"), v("v"), v("x")]));
    assert_eq!(must_bound_vars(&p(TRAIN)), BTreeSet::from([v("a"), v("v"), v("x")]));
}

#[test]
fn manual_free_variable_enumeration_of_train_program() {
    // control reads v; plant reads x, v and a, but a is written by every control branch
    assert_eq!(program_free_vars(&p(TRAIN)), BTreeSet::from([v("v"), v("x")]));
}

#[test]
fn substitution_examples() {
    let g = substitute(&f("v < 100"), &v("v"), &(pv("s") + pv("v0"))).unwrap();
    assert_eq!(g, f("s + v0 < 100"));
    let h = f("x > 0 & forall y (x < y)");
    assert_eq!(substitute(&h, &v("x"), &pv("x")).unwrap(), h);
    let e = substitute(&f("forall y (x < y)"), &v("x"), &pv("y")).unwrap_err();
    assert!(matches!(e, SubstError::Capture { .. }));
}

#[test]
fn substitution_into_modalities() {
    let g = f("[{x'=v, v'=a}] tae: v < 100");
    let s = substitute(&g, &v("a"), &Poly::one()).unwrap();
    assert_eq!(s, f("[{x'=v, v'=1}] tae: v < 100"));
    assert!(matches!(substitute(&g, &v("v"), &Poly::int(3)), Err(SubstError::Inadmissible { .. })));
    assert!(matches!(substitute(&f("[v := 1] v > a"), &v("a"), &pv("v")), Err(SubstError::Inadmissible { .. })));
    // x not free: untouched
    assert_eq!(substitute(&f("[x := 1] x > 0"), &v("x"), &pv("y")).unwrap(), f("[x := 1] x > 0"));
}

#[test]
fn expand_connectives_uses_not_and() {
    let g = f("a > 0 | b > 0 -> c > 0 <-> d > 0").expand_connectives();
    fn only_not_and(g: &Formula) -> bool {
        match g {
            Formula::Atom(_) => true,
            Formula::Not(h) => only_not_and(h),
            Formula::And(a, b) => only_not_and(a) && only_not_and(b),
            _ => false,
        }
    }
    assert!(only_not_and(&g));
}

// ---- random ASTs ----

const NAMES: &[&str] = &["x", "y", "v", "a"];

fn arb_var() -> impl Strategy<Value = VarId> {
    prop::sample::select(NAMES).prop_map(VarId::named)
}

pub(crate) fn arb_term() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-4i64..=4, 1i64..=3, prop::sample::select(NAMES), 0u32..3), 0..4)
        .prop_map(|ts| ts.into_iter().fold(Poly::zero(), |acc, (n, d, x, e)| acc + pv(x).pow(e).scale(&ratio(n, d))))
}

fn arb_cmp() -> impl Strategy<Value = Cmp> {
    prop::sample::select(vec![Cmp::Eq, Cmp::Ne, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge])
}

fn arb_atom() -> impl Strategy<Value = Formula> {
    (arb_term(), arb_cmp()).prop_map(|(t, c)| Formula::atom(t, c))
}

fn arb_fo() -> impl Strategy<Value = Formula> {
    arb_atom().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::equiv(a, b)),
            (arb_var(), inner.clone()).prop_map(|(x, a)| Formula::forall(x, a)),
            (arb_var(), inner).prop_map(|(x, a)| Formula::exists(x, a)),
        ]
    })
}

fn arb_ode() -> impl Strategy<Value = Program> {
    (prop::sample::subsequence(NAMES.to_vec(), 1..3), prop::collection::vec(arb_term(), 3), arb_fo())
        .prop_map(|(xs, rhs, dom)| Program::ode(xs.iter().zip(rhs).map(|(x, e)| (VarId::named(x), e)).collect(), dom))
}

fn arb_program() -> impl Strategy<Value = Program> {
    let leaf = prop_oneof![
        (arb_var(), arb_term()).prop_map(|(x, e)| Program::assign(x, e)),
        arb_fo().prop_map(Program::test),
        arb_ode(),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::choice(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::seq(a, b)),
            inner.prop_map(Program::looped),
        ]
    })
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        3 => arb_atom(),
        1 => (arb_program(), arb_fo(), any::<bool>()).prop_map(|(p, q, tae)| {
            if tae { Formula::box_tae(p, q) } else { Formula::box_state(p, q) }
        }),
        1 => (arb_program(), arb_fo()).prop_map(|(p, q)| Formula::diamond(p, TraceFormula::State(q))),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::equiv(a, b)),
            (arb_var(), inner.clone()).prop_map(|(x, a)| Formula::forall(x, a)),
            (arb_program(), inner).prop_map(|(p, q)| Formula::box_state(p, q)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn formulas_round_trip(g in arb_formula()) {
        let text = g.to_string();
        let back = parse_state_formula(&text);
        prop_assert!(back.is_ok(), "failed to reparse {text}: {:?}", back);
        prop_assert_eq!(back.unwrap(), g);
    }

    #[test]
    fn programs_round_trip(q in arb_program()) {
        let text = q.to_string();
        prop_assert_eq!(parse_program(&text).unwrap(), q);
    }

    #[test]
    fn terms_round_trip(t in arb_term()) {
        prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn printing_is_a_fixpoint(g in arb_formula()) {
        let once = g.to_string();
        let twice = parse_state_formula(&once).unwrap().to_string();
        prop_assert_eq!(once, twice);
    }
}

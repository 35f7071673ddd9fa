//! Random inputs, produced as source text where possible so failures print readably.

use pdtl_core::poly::{rat, ratio, NfAtom, NfRel, NormalForm, Poly};
use pdtl_core::sim::State;
use pdtl_core::syntax::VarId;
use proptest::prelude::*;

/// `a*x + b*y + c` as text.
pub fn linear_term() -> impl Strategy<Value = String> {
    (-3i64..=3, -3i64..=3, -4i64..=4).prop_map(|(a, b, c)| format!("({a})*x + ({b})*y + ({c})"))
}

pub fn cmp() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("<"), Just("<="), Just("="), Just(">="), Just(">"), Just("!=")]
}

pub fn linear_atom() -> impl Strategy<Value = String> {
    (linear_term(), cmp()).prop_map(|(t, c)| format!("{t} {c} 0"))
}

/// Quantifier-free linear formulas over `x` and `y`.
pub fn linear_formula() -> impl Strategy<Value = String> {
    linear_atom().prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("!({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) & ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) | ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) -> ({b})")),
        ]
    })
}

/// A bound `lo <= v <= hi` style atom, kept simple so domains are often nonempty.
pub fn domain() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        (prop_oneof![Just("x"), Just("y")], prop_oneof![Just("<="), Just("<"), Just(">="), Just(">")], -3i64..=6)
            .prop_map(|(v, c, k)| format!(" & {v} {c} {k}")),
        linear_atom().prop_map(|a| format!(" & {a}")),
    ]
}

/// Constant-rate ODEs, so solutions stay linear in time.
pub fn linear_ode() -> impl Strategy<Value = String> {
    (-2i64..=2, -2i64..=2, domain()).prop_map(|(a, b, d)| format!("{{x' = {a}, y' = {b}{d}}}"))
}

/// ODEs whose solutions may be quadratic in time.
pub fn polynomial_ode() -> impl Strategy<Value = String> {
    prop_oneof![linear_ode(), (-2i64..=2, domain()).prop_map(|(b, d)| format!("{{x' = y, y' = {b}{d}}}")),]
}

fn program_with(leaf_ode: BoxedStrategy<String>) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        3 => (prop_oneof![Just("x"), Just("y")], linear_term()).prop_map(|(v, t)| format!("{v} := {t}")),
        2 => linear_atom().prop_map(|a| format!("?({a})")),
        2 => leaf_ode,
    ];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}); ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) ++ ({b})")),
        ]
    })
}

/// Loop-free programs with linear assignments, tests and constant-rate ODEs.
pub fn linear_program() -> impl Strategy<Value = String> {
    program_with(linear_ode().boxed())
}

/// Loop-free programs whose flows are polynomial.
pub fn polynomial_program() -> impl Strategy<Value = String> {
    program_with(polynomial_ode().boxed())
}

pub fn small_rational() -> impl Strategy<Value = (i64, i64)> {
    (-12i64..=12, 1i64..=4)
}

pub fn xy_state() -> impl Strategy<Value = State> {
    (small_rational(), small_rational())
        .prop_map(|((a, b), (c, d))| State::exact([(VarId::named("x"), ratio(a, b)), (VarId::named("y"), ratio(c, d))]))
}

/// Time variable of the normal forms below.
pub fn time() -> VarId {
    VarId::named("t")
}

/// The one parameter the normal-form coefficients may mention.
pub fn parameter() -> VarId {
    VarId::named("p")
}

/// Coefficient `c + d*p`, zero a third of the time.
fn coefficient() -> impl Strategy<Value = Poly> {
    prop_oneof![
        1 => Just(Poly::zero()),
        2 => ((-4i64..=4), (1i64..=3), (-2i64..=2))
            .prop_map(|(c, q, d)| &Poly::constant(ratio(c, q)) + &Poly::var(&parameter()).scale(&rat(d))),
    ]
}

/// A polynomial of degree at most four in time, compared against zero.
fn normal_atom() -> impl Strategy<Value = NormalForm> {
    let rel = prop_oneof![Just(NfRel::Eq), Just(NfRel::Ge), Just(NfRel::Lt), Just(NfRel::Lt)];
    (prop::collection::vec(coefficient(), 1..=5), rel).prop_map(|(cs, rel)| {
        let poly = cs.iter().enumerate().fold(Poly::zero(), |acc, (k, c)| &acc + &(c * &Poly::var(&time()).pow(k as u32)));
        NormalForm::Atom(NfAtom { poly, rel })
    })
}

pub fn normal_form() -> impl Strategy<Value = NormalForm> {
    normal_atom().prop_recursive(2, 4, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| NormalForm::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| NormalForm::Or(Box::new(a), Box::new(b))),
        ]
    })
}

/// A state over `x` and `y` with three spare values.
pub fn point() -> impl Strategy<Value = crate::conservativity::Point> {
    (xy_state(), prop::collection::vec(small_rational(), 3)).prop_map(|(state, spare)| crate::conservativity::Point {
        state,
        spare: spare.into_iter().map(|(a, b)| ratio(a, b)).collect(),
    })
}

use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::poly::ratio;
use crate::syntax::{parse_ode, parse_term};

fn sys(s: &str) -> OdeSystem {
    parse_ode(s).unwrap()
}

fn term(s: &str) -> Poly {
    parse_term(s).unwrap()
}

#[test]
fn double_integrator() {
    let s = sys("{x'=v, v'=a}");
    let sol = solve_polynomial(&s).unwrap();
    assert_eq!(sol.time.as_str(), "t");
    assert_eq!(sol.get(&VarId::named("x")).unwrap(), &term("1/2*a*t^2 + v*t + x"));
    assert_eq!(sol.get(&VarId::named("v")).unwrap(), &term("a*t + v"));
    assert!(verify_solution(&s, &sol));
    // with a = 1 and time s: .5s^2 + v0 s + x0
    let s1 = sys("{x'=v, v'=1}");
    let sol1 = solve_polynomial(&s1).unwrap();
    let at_s = sol1.at_time(&Poly::var(&VarId::named("s")));
    assert_eq!(at_s[&VarId::named("x")], term(".5*s^2 + v*s + x"));
    assert_eq!(at_s[&VarId::named("v")], term("s + v"));
}

#[test]
fn constant_flow() {
    let s = sys("{x'=0}");
    let sol = solve_polynomial(&s).unwrap();
    assert_eq!(sol.get(&VarId::named("x")).unwrap(), &term("x"));
    assert!(verify_solution(&s, &sol));
}

#[test]
fn independent_linear_flows() {
    let s = sys("{a1'=1, a2'=2}");
    let sol = solve_polynomial(&s).unwrap();
    assert_eq!(sol.get(&VarId::named("a1")).unwrap(), &term("t + a1"));
    assert_eq!(sol.get(&VarId::named("a2")).unwrap(), &term("2*t + a2"));
    assert!(verify_solution(&s, &sol));
}

#[test]
fn exponential_decay_is_not_polynomial() {
    assert!(matches!(solve_polynomial(&sys("{x'=-x, y'=-y}")), Err(OdeError::NotPolynomialSolvable { .. })));
    assert!(matches!(solve_polynomial(&sys("{x'=y, y'=-x}")), Err(OdeError::NotPolynomialSolvable { .. })));
    assert!(matches!(solve_polynomial(&sys("{x'=x^2}")), Err(OdeError::DepthExceeded { .. })));
}

#[test]
fn time_variable_is_fresh() {
    let s = sys("{x'=t, t'=1}");
    let sol = solve_polynomial(&s).unwrap();
    assert_ne!(sol.time.as_str(), "t");
    assert!(verify_solution(&s, &sol));
}

#[test]
fn corrupted_solution_is_rejected() {
    let s = sys("{v'=a}");
    let t = VarId::named("t");
    let bad = PolySolution { time: t.clone(), components: vec![(VarId::named("v"), term("t^2 + v"))] };
    assert!(!verify_solution(&s, &bad));
    let good = solve_polynomial(&s).unwrap();
    assert!(verify_solution(&s, &good));
    let wrong_start = PolySolution { time: t, components: vec![(VarId::named("v"), term("a*t + v + 1"))] };
    assert!(!verify_solution(&s, &wrong_start));
}

fn state(pairs: &[(&str, f64)]) -> BTreeMap<VarId, f64> {
    pairs.iter().map(|(k, v)| (VarId::named(k), *v)).collect()
}

#[test]
fn rk4_matches_exponential() {
    let flow = numeric_flow(&sys("{x'=-x, y'=-y}"), &state(&[("x", 0.0), ("y", 1.0)]), 1.0, 0.001).unwrap();
    let y = flow.values.last().unwrap()[flow.index_of(&VarId::named("y")).unwrap()];
    assert!((y - (-1f64).exp()).abs() < 1e-6);
    assert_eq!(flow.duration(), 1.0);
}

#[test]
fn rk4_constant_flow_and_untouched_variables() {
    let flow = numeric_flow(&sys("{x'=0}"), &state(&[("x", 3.0), ("z", 0.1)]), 2.0, 0.25).unwrap();
    for vals in &flow.values {
        assert_eq!(vals[0], 3.0);
        assert_eq!(vals[1].to_bits(), 0.1f64.to_bits());
    }
}

#[test]
fn rk4_train_acceleration() {
    let flow = numeric_flow(&sys("{x'=v, v'=a}"), &state(&[("x", 0.0), ("v", 99.0), ("a", 1.0)]), 1.0, 0.01).unwrap();
    let v = flow.values.last().unwrap()[flow.index_of(&VarId::named("v")).unwrap()];
    assert!((v - 100.0).abs() < 1e-9);
}

#[test]
fn rk4_is_deterministic() {
    let s = sys("{x'=y, y'=-x}");
    let a = numeric_flow(&s, &state(&[("x", 1.0), ("y", 0.0)]), 3.0, 0.01).unwrap();
    let b = numeric_flow(&s, &state(&[("x", 1.0), ("y", 0.0)]), 3.0, 0.01).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.state_at(1.234), b.state_at(1.234));
}

#[test]
fn exact_evaluation_of_solution() {
    let s = sys("{x'=v, v'=a}");
    let sol = solve_polynomial(&s).unwrap();
    let init: BTreeMap<VarId, Rational> =
        [("x", 0), ("v", 99), ("a", 1)].iter().map(|(k, v)| (VarId::named(k), rat(*v))).collect();
    let end = eval_solution(&sol, &init, &rat(1)).unwrap();
    assert_eq!(end[&VarId::named("v")], rat(100));
    assert_eq!(end[&VarId::named("x")], ratio(199, 2));
}

/// Random strictly upper-triangular linear systems with constant inputs.
fn arb_nilpotent() -> impl Strategy<Value = OdeSystem> {
    (1usize..=4).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, n + 1), n).prop_map(move |rows| {
            let names: Vec<VarId> = (0..n).map(|i| VarId::named(&format!("x{i}"))).collect();
            let eqs = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut f = Poly::int(row[n]);
                    for j in (i + 1)..n {
                        f = f + Poly::var(&names[j]).scale(&rat(row[j]));
                    }
                    (names[i].clone(), f)
                })
                .collect();
            OdeSystem::new(eqs, crate::syntax::Formula::tt())
        })
    })
}

proptest! {
    #[test]
    fn nilpotent_systems_are_solved_and_verified(s in arb_nilpotent()) {
        let sol = solve_polynomial(&s).unwrap();
        prop_assert!(verify_solution(&s, &sol));
    }

    #[test]
    fn rk4_agrees_with_polynomial_solution(s in arb_nilpotent(), r in 1u32..=10, inits in prop::collection::vec(-3i64..=3, 4)) {
        let sol = solve_polynomial(&s).unwrap();
        let vars: Vec<VarId> = s.vars().cloned().collect();
        let exact_init: BTreeMap<VarId, Rational> = vars.iter().zip(&inits).map(|(v, c)| (v.clone(), rat(*c))).collect();
        let float_init: BTreeMap<VarId, f64> = vars.iter().zip(&inits).map(|(v, c)| (v.clone(), *c as f64)).collect();
        let flow = numeric_flow(&s, &float_init, r as f64, 0.01).unwrap();
        for (k, t) in flow.times.iter().enumerate().step_by(50) {
            let tq = Rational::from_float(*t).unwrap();
            let exact = eval_solution(&sol, &exact_init, &tq).unwrap();
            for (i, v) in flow.vars.iter().enumerate() {
                let e = rational_to_f64(&exact[v]);
                let got = flow.values[k][i];
                prop_assert!((got - e).abs() <= 1e-6 * e.abs().max(1.0), "{v} at {t}: {got} vs {e}");
            }
        }
    }
}

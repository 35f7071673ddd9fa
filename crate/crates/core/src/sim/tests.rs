use super::*;
use crate::poly::ratio;
use crate::syntax::{parse_program, parse_state_formula, Formula, Program};

fn prog(s: &str) -> Program {
    parse_program(s).unwrap()
}

fn form(s: &str) -> Formula {
    parse_state_formula(s).unwrap()
}

fn state(vals: &[(&str, i64)]) -> State {
    State::exact(vals.iter().map(|(x, v)| (VarId::named(x), ratio(*v, 1))))
}

fn cfg_with(durations: &[(i64, i64)]) -> EnumConfig {
    EnumConfig { durations: durations.iter().map(|(n, d)| ratio(*n, *d)).collect(), ..EnumConfig::default() }
}

fn value(s: &State, x: &str) -> Rational {
    s.get(&VarId::named(x)).unwrap().exact().unwrap().clone()
}

fn single_flow_report(system: &str, init: &State, duration: i64, phi: &str) -> ViolationReport {
    let cfg = cfg_with(&[(duration, 1)]);
    let traces = enumerate_traces(&prog(system), init, &cfg).unwrap();
    assert_eq!(traces.len(), 1);
    let flow = &traces[0].flows[0];
    assert!(flow.is_exact());
    violation_measure(flow, &form(phi), &cfg, 0, &Rational::zero(), 0).unwrap()
}

#[test]
fn atoms_evaluate_at_states() {
    let cfg = EnumConfig::default();
    assert_eq!(eval_state_formula(&state(&[("v", 99)]), &form("v < 100"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&state(&[("v", 100)]), &form("v < 100"), &cfg), Truth::False);
    assert!(matches!(eval_state_formula(&state(&[]), &form("v < 100"), &cfg), Truth::Unknown(_)));
}

#[test]
fn kleene_connectives() {
    let u = || Truth::Unknown("u".into());
    assert_eq!(Truth::False.and(u), Truth::False);
    assert_eq!(u().and(|| Truth::False), Truth::False);
    assert_eq!(Truth::True.or(u), Truth::True);
    assert_eq!(u().or(|| Truth::True), Truth::True);
    assert!(matches!(u().and(|| Truth::True), Truth::Unknown(_)));
    assert!(matches!(u().not(), Truth::Unknown(_)));
}

#[test]
fn quantifiers_are_decided_after_plugging_in_the_state() {
    let cfg = EnumConfig::default();
    let w = state(&[("x", 1)]);
    assert_eq!(eval_state_formula(&w, &form("exists y (y > x & y < 2)"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("forall y (y > x)"), &cfg), Truth::False);
    assert_eq!(eval_state_formula(&w, &form("forall y ([y := y + x] y > x - 1 + y - 1)"), &cfg), Truth::True);
}

#[test]
fn discrete_modalities() {
    let cfg = EnumConfig::default();
    let w = state(&[("x", 0)]);
    assert_eq!(eval_state_formula(&w, &form("[x := 5] x = 5"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("[?x > 1] false"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("<?x > 1> true"), &cfg), Truth::False);
    assert_eq!(eval_state_formula(&w, &form("[x := 1 ++ x := 2] x >= 1"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("<x := 1 ++ x := 2> x = 2"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("[{x := x + 1}*] x <= 3"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("[{x := x + 1}*] x <= 2"), &cfg), Truth::False);
}

#[test]
fn ode_boxes_cover_every_duration() {
    let cfg = EnumConfig::default();
    let w = state(&[("x", 0)]);
    assert_eq!(eval_state_formula(&w, &form("[{x' = 1 & x <= 3}] x <= 3"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("[{x' = 1}] x <= 3"), &cfg), Truth::False);
    assert_eq!(eval_state_formula(&w, &form("<{x' = 1}> x > 10"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("<{x' = 1 & x <= 3}> x > 10"), &cfg), Truth::False);
    assert_eq!(eval_state_formula(&w, &form("[{x' = 1 & x < 0}] false"), &cfg), Truth::True);
}

#[test]
fn sampled_ode_boxes_without_exhaustive_mode() {
    let cfg = EnumConfig { exhaustive_ode: false, ..EnumConfig::default() };
    let w = state(&[("x", 0)]);
    // the largest sampled duration is 2
    assert_eq!(eval_state_formula(&w, &form("[{x' = 1}] x <= 3"), &cfg), Truth::True);
    assert_eq!(eval_state_formula(&w, &form("[{x' = 1}] x <= 1"), &cfg), Truth::False);
}

#[test]
fn failing_test_gives_an_aborting_trace() {
    let traces = enumerate_traces(&prog("?(v = 100)"), &state(&[("v", 50)]), &EnumConfig::default()).unwrap();
    assert_eq!(traces.len(), 1);
    assert_eq!(traces[0].len(), 2);
    assert!(!traces[0].terminates());
    assert!(traces[0].flows[1].is_abort());
}

#[test]
fn assignment_gives_two_states() {
    let traces = enumerate_traces(&prog("x := 5"), &state(&[("x", 0)]), &EnumConfig::default()).unwrap();
    assert_eq!(traces.len(), 1);
    let t = &traces[0];
    assert_eq!(t.len(), 2);
    assert_eq!(value(&t.first(), "x"), ratio(0, 1));
    assert_eq!(value(&t.last(), "x"), ratio(5, 1));
    assert!(t.flows.iter().all(|f| f.duration.is_zero()));
}

#[test]
fn train_body_at_the_speed_limit() {
    let body = prog("((?(v<100); a:=1) ++ (?(v=100); a:=-1)); {x'=v, v'=a & 0<=v & v<=100}");
    let w = state(&[("a", 0), ("v", 100), ("x", 0)]);
    let traces = enumerate_traces(&body, &w, &cfg_with(&[(0, 1), (1, 1)])).unwrap();
    let (aborting, ok): (Vec<_>, Vec<_>) = traces.iter().partition(|t| !t.terminates());
    assert_eq!(aborting.len(), 1);
    let mut durations: Vec<Rational> = ok.iter().map(|t| t.flows.last().unwrap().duration.clone()).collect();
    durations.sort();
    assert_eq!(durations, vec![ratio(0, 1), ratio(1, 1)]);
    let end = ok.iter().find(|t| t.flows.last().unwrap().duration == ratio(1, 1)).unwrap().last();
    assert_eq!(value(&end, "v"), ratio(99, 1));
    assert_eq!(value(&end, "x"), ratio(199, 2));
}

#[test]
fn domain_truncates_flows() {
    let w = state(&[("v", 0)]);
    let traces = enumerate_traces(&prog("{v' = 1 & v <= 3}"), &w, &cfg_with(&[(1, 1), (5, 1), (10, 1)])).unwrap();
    let durations: Vec<Rational> = traces.iter().map(|t| t.flows[0].duration.clone()).collect();
    assert_eq!(durations, vec![ratio(1, 1), ratio(3, 1)]);
    // the supremum is not attained, so a point strictly inside is used
    let traces = enumerate_traces(&prog("{v' = 1 & v < 3}"), &w, &cfg_with(&[(10, 1)])).unwrap();
    assert_eq!(traces[0].flows[0].duration, ratio(3, 2));
}

#[test]
fn domain_failing_at_the_start_aborts() {
    let traces = enumerate_traces(&prog("{v' = 1 & v > 0}"), &state(&[("v", 0)]), &EnumConfig::default()).unwrap();
    assert_eq!(traces.len(), 1);
    assert!(!traces[0].terminates());
}

#[test]
fn untouched_variables_stay_constant_along_flows() {
    let w = state(&[("v", 0), ("z", 7)]);
    for t in enumerate_traces(&prog("{v' = 1}"), &w, &EnumConfig::default()).unwrap() {
        assert_eq!(value(&t.last(), "z"), ratio(7, 1));
    }
    let w = State::exact([(VarId::named("x"), ratio(1, 1)), (VarId::named("z"), ratio(7, 1))]);
    for t in enumerate_traces(&prog("{x' = -x}"), &w, &EnumConfig::default()).unwrap() {
        assert!(!t.is_exact() || t.flows[0].duration.is_zero());
        assert_eq!(t.last().get(&VarId::named("z")), Some(&Real::Exact(ratio(7, 1))));
    }
}

#[test]
fn position_to_time_examples() {
    let two = enumerate_traces(&prog("{x' = 1}; {x' = 1}"), &state(&[("x", 0)]), &cfg_with(&[(2, 1)])).unwrap();
    let t = &two[0];
    assert_eq!(position_to_time(t, 0, &Rational::zero()).unwrap(), ratio(0, 1));
    assert_eq!(position_to_time(t, 1, &ratio(1, 2)).unwrap(), ratio(7, 2));
    assert!(position_to_time(t, 2, &Rational::zero()).is_err());
    assert!(position_to_time(t, 0, &ratio(3, 1)).is_err());

    let mixed = enumerate_traces(&prog("{x' = 1}; x := x"), &state(&[("x", 0)]), &cfg_with(&[(1, 1)])).unwrap();
    let t = &mixed[0];
    assert_eq!(t.len(), 3);
    assert_eq!(position_to_time(t, 2, &Rational::zero()).unwrap(), ratio(3, 1));
}

#[test]
fn composition() {
    let cfg = EnumConfig::default();
    let xi = enumerate_traces(&prog("x := 1"), &state(&[("x", 0)]), &cfg).unwrap().remove(0);
    let eta = enumerate_traces(&prog("x := 2"), &xi.last(), &cfg).unwrap().remove(0);
    let both = compose(&xi, &eta).unwrap();
    assert_eq!(both.len(), 4);
    assert_eq!(value(&both.last(), "x"), ratio(2, 1));

    let stuck = Trace::failing(state(&[("x", 0)]));
    assert_eq!(compose(&stuck, &eta).unwrap().len(), 2);

    assert!(matches!(compose(&eta, &xi), Err(SimError::NotComposable(_))));
}

#[test]
fn reach_relation_examples() {
    let cfg = EnumConfig::default();
    let w = state(&[("x", 0)]);
    assert_eq!(reach_relation(&prog("x := 5"), &w, &cfg).unwrap(), vec![state(&[("x", 5)])]);
    let mut xs: Vec<Rational> = reach_relation(&prog("{x := x + 1}*"), &w, &cfg).unwrap().iter().map(|s| value(s, "x")).collect();
    xs.sort();
    assert_eq!(xs, (0..=3).map(|k| ratio(k, 1)).collect::<Vec<_>>());
    assert!(reach_relation(&prog("?false"), &w, &cfg).unwrap().is_empty());
}

#[test]
fn robot_variants_differ_in_measure() {
    let w = state(&[("a1", -1), ("a2", -1)]);
    let phi = "!(a1 <= 0 & a2 >= 0)";
    let unsafe_run = single_flow_report("{a1' = 1, a2' = 2}", &w, 2, phi);
    assert_eq!(unsafe_run.measure, Measure::Exact(ratio(1, 2)));
    assert!(unsafe_run.exact);
    assert_eq!(unsafe_run.witnesses.len(), 1);
    assert_eq!(unsafe_run.witnesses[0].exact_bounds(), Some((ratio(1, 2), ratio(1, 1))));
    assert_eq!(unsafe_run.witnesses[0].local(), "[1/2, 1]");

    let safe_run = single_flow_report("{a1' = 1, a2' = 1}", &w, 2, phi);
    assert_eq!(safe_run.measure, Measure::Exact(ratio(0, 1)));
    assert_eq!(safe_run.witnesses.len(), 1);
    assert_eq!(safe_run.witnesses[0].local(), "{1}");

    let trivial = single_flow_report("{a1' = 1, a2' = 2}", &w, 2, "true");
    assert_eq!(trivial.measure, Measure::Exact(ratio(0, 1)));
}

#[test]
fn exact_measure_matches_a_riemann_sum() {
    let w = state(&[("x", 0)]);
    let r = single_flow_report("{x' = 1}", &w, 3, "x^2 - 3*x + 2 > 0");
    let Measure::Exact(m) = r.measure else { panic!("inexact") };
    assert_eq!(m, ratio(1, 1));
    let n = 100_000;
    let hits = (0..n).filter(|k| {
        let t = 3.0 * (*k as f64 + 0.5) / n as f64;
        t * t - 3.0 * t + 2.0 <= 0.0
    });
    assert!((3.0 * hits.count() as f64 / n as f64 - 1.0).abs() < 1e-3);
}

#[test]
fn discrete_condition_catches_the_incremented_state() {
    let p = prog("x := 5; {x := x + 1}*");
    let phi = form("x < 5");
    for n in 1..=3 {
        let cfg = EnumConfig { unroll: n, ..EnumConfig::default() };
        let report = eval_box_tae(&p, &state(&[("x", 0)]), &phi, &cfg);
        assert_eq!(report.verdict, BoxVerdict::Fails);
        assert!(report.bounded);
        let failed = report.failures().next().unwrap();
        let TaeVerdict::FailedDiscrete { state, .. } = &failed.verdict else { panic!("expected a discrete failure") };
        assert_eq!(value(state, "x"), ratio(6, 1));
    }
}

#[test]
fn tae_on_an_accelerate_then_brake_trace() {
    let cfg = cfg_with(&[(1, 1)]);
    let w = state(&[("a", 1), ("v", 99)]);
    let up = enumerate_traces(&prog("{v' = a}"), &w, &cfg).unwrap().remove(0);
    let down = enumerate_traces(&prog("a := -1; {v' = a}"), &up.last(), &cfg).unwrap().remove(0);
    let t = compose(&up, &down).unwrap();
    let v = tae_eval(&t, &form("v < 100"), &cfg);
    let TaeVerdict::Holds { report } = v else { panic!("{v:?}") };
    assert_eq!(report.measure, Measure::Exact(ratio(0, 1)));
    assert!(!report.witnesses.is_empty());
}

#[test]
fn train_model_is_safe_on_bounded_runs() {
    let p = prog("{((?(v<100); a:=1) ++ (?(v=100); a:=-1)); {x'=v, v'=a & 0<=v & v<=100}}*");
    let cfg = EnumConfig { unroll: 3, ..cfg_with(&[(0, 1), (1, 2), (1, 1), (101, 1)]) };
    let report = eval_box_tae(&p, &state(&[("a", 0), ("v", 0), ("x", 0)]), &form("v < 100"), &cfg);
    assert_eq!(report.verdict, BoxVerdict::Holds);
    assert!(report.bounded);
    assert!(!report.statistical);
}

#[test]
fn shrinking_circle_holds_statistically() {
    let p = prog("x := 0; y := 1; {x' = -x, y' = -y}");
    let report = eval_box_tae(&p, &state(&[("x", 0), ("y", 1)]), &form("x^2 + y^2 < 1"), &EnumConfig::default());
    assert_eq!(report.verdict, BoxVerdict::Holds);
    assert!(report.statistical);
    assert!(!report.bounded);
}

#[test]
fn strict_and_relaxed_variants() {
    let p = prog("x := 0; y := 0; {x' = 0, y' = 1}");
    let w = state(&[("x", 0), ("y", 0)]);
    let cfg = EnumConfig::default();
    for phi in ["y > 0 -> x > 1 | x < 1", "y >= 0 -> x >= 1 | x <= 1", "y >= 0 -> x > 1"] {
        let r = eval_box_tae(&p, &w, &form(phi), &cfg);
        let expected = if phi.ends_with("x > 1") { BoxVerdict::Fails } else { BoxVerdict::Holds };
        assert_eq!(r.verdict, expected, "{phi}");
    }
}

#[test]
fn closure_membership_needs_no_quantifier_elimination_for_linear_formulas() {
    let post = Postcondition::new(&form("v < 100")).unwrap();
    assert_eq!(post.closure_holds(&state(&[("v", 100)])), Truth::True);
    assert_eq!(post.closure_holds(&state(&[("v", 101)])), Truth::False);
    let empty = Postcondition::new(&form("x < 1 & x > 1")).unwrap();
    assert_eq!(empty.closure_holds(&state(&[("x", 1)])), Truth::False);
}

#[test]
fn nonlinear_closure_membership() {
    let disc = Postcondition::new(&form("x^2 + y^2 < 1")).unwrap();
    assert_eq!(disc.closure_holds(&state(&[("x", 0), ("y", 1)])), Truth::True);
    assert_eq!(disc.closure_holds(&state(&[("x", 1), ("y", 1)])), Truth::False);
    // isolated point: the relaxation admits it but no nearby point satisfies the formula
    let point = Postcondition::new(&form("x^2 < 0")).unwrap();
    assert!(!point.closure_holds(&state(&[("x", 0)])).is_true());
}

#[test]
fn quantified_postconditions_are_rejected() {
    let r = eval_box_tae(&prog("x := 1"), &state(&[("x", 0)]), &form("exists y (y > x)"), &EnumConfig::default());
    assert!(matches!(r.verdict, BoxVerdict::Unknown(_)));
}

#[test]
fn trace_budget_is_enforced() {
    let cfg = EnumConfig { unroll: 10, max_traces: 50, ..EnumConfig::default() };
    let r = enumerate_traces(&prog("{x := 1 ++ x := 2}*"), &state(&[("x", 0)]), &cfg);
    assert!(matches!(r, Err(SimError::TooManyTraces(50))));
}

#[test]
fn simulation_is_deterministic() {
    let p = prog("x := 0; y := 1; {x' = -x, y' = -y}");
    let w = state(&[("x", 0), ("y", 1)]);
    let cfg = EnumConfig { mc_samples: 2000, seed: 7, ..EnumConfig::default() };
    let a = eval_box_tae(&p, &w, &form("y < 1/2"), &cfg);
    let b = eval_box_tae(&p, &w, &form("y < 1/2"), &cfg);
    let json = |r: &BoxTaeReport| serde_json::to_string(&r.records.iter().map(|x| &x.verdict).collect::<Vec<_>>()).unwrap();
    assert_eq!(json(&a), json(&b));
    assert_eq!(a.verdict, BoxVerdict::Fails);
}

use super::*;
use crate::syntax::{parse_state_formula, Formula};

const TRAIN: &str = "a=0 & v=0 -> [{((?(v<100); a:=1) ++ (?(v=100); a:=-1)); {x'=v, v'=a & 0<=v & v<=100}}*] tae: v<100";

const TRAIN_SCRIPT: &str = "
goal 0: impR at R0
goal 1: loop_tae at R0 with v < 100
goal 2: close_arith
goal 4: id at R0
goal 3: tae_seq at R0
goal 5: andR at R0
goal 6: tae_choice at R0
goal 8: andR at R0
goal 9: tae_seq at R0
goal 11: andR at R0
goal 12: tae_test at R0
goal 14: id at R0
goal 13: dl_test at R0
goal 15: impR at R0
goal 16: tae_assign at R0
goal 17: dl_assign at R0.1
goal 18: close_arith
goal 10: tae_seq at R0
goal 19: andR at R0
goal 20: tae_test at R0
goal 22: id at R0
goal 21: dl_test at R0
goal 23: impR at R0
goal 24: tae_assign at R0
goal 25: dl_assign at R0.1
goal 26: close_arith
goal 7: dl_choice at R0
goal 27: andR at R0
goal 28: dl_seq at R0
goal 30: dl_test at R0
goal 31: impR at R0
goal 32: dl_assign at R0
goal 33: tae_solve_dom at R0
goal 34: rewrite at R0.1.0.1.1 with t + v <= 100
goal 36: close_arith
goal 35: dl_assign at R0.1.0.1.0.0.1.1
goal 37: dl_assign at R0.1.0.1.0.0.1
goal 38: close_arith
goal 29: dl_seq at R0
goal 39: dl_test at R0
goal 40: impR at R0
goal 41: dl_assign at R0
goal 42: tae_solve_dom at R0
goal 43: dl_assign at R0.1.0.1.0.0.1.1
goal 44: dl_assign at R0.1.0.1.0.0.1
goal 45: close_arith
";

fn f(s: &str) -> Formula {
    parse_state_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn seq(ante: &[&str], succ: &[&str]) -> Sequent {
    Sequent::new(ante.iter().map(|s| f(s)).collect(), succ.iter().map(|s| f(s)).collect())
}

fn reg() -> RuleRegistry {
    RuleRegistry::standard()
}

fn run(rule: &str, goal: &Sequent, pos: Option<&str>, arg: Option<&str>) -> Result<RuleOutcome, KernelError> {
    let r = reg();
    let kind = r.get(rule)?.arg_kind();
    let arg = RuleArg::parse(kind, arg)?;
    let pos = pos.map(|p| p.parse::<Position>().unwrap());
    r.apply(rule, goal, pos.as_ref(), &arg)
}

fn premises(rule: &str, goal: &Sequent, pos: Option<&str>, arg: Option<&str>) -> Vec<Sequent> {
    match run(rule, goal, pos, arg).unwrap_or_else(|e| panic!("{rule}: {e}")) {
        RuleOutcome::Premises { goals, .. } => goals,
        RuleOutcome::Stuck(why) => panic!("{rule} stuck: {why}"),
    }
}

fn replay(script: &str, claim: &str) -> ScriptReport {
    let s: ProofScript = script.parse().unwrap();
    check_script(&reg(), &s, &Sequent::goal(f(claim))).unwrap()
}

#[test]
fn train_script_closes() {
    let start = std::time::Instant::now();
    let report = replay(TRAIN_SCRIPT, TRAIN);
    assert!(report.closed(), "open: {:?}", report.open);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let used: std::collections::BTreeSet<_> =
        report.proof.nodes().iter().filter_map(|n| n.step.as_ref().map(|s| s.rule.as_str())).collect();
    for r in [
        "loop_tae",
        "tae_seq",
        "tae_choice",
        "dl_choice",
        "tae_test",
        "tae_assign",
        "dl_seq",
        "dl_assign",
        "dl_test",
        "tae_solve_dom",
        "rewrite",
        "close_arith",
    ] {
        assert!(used.contains(r), "{r} unused");
    }
}

#[test]
fn train_script_with_weaker_invariant_leaves_arithmetic_leaf() {
    let script = TRAIN_SCRIPT
        .replace("with v < 100", "with v < 99")
        .replace("id at R0", "close_arith")
        .replace("with t + v <= 100", "with t + v <= 99");
    let report = replay(&script, TRAIN);
    assert_eq!(report.open.len(), 1);
    let leaf = &report.open[0];
    assert!(leaf.sequent.is_first_order());
    assert!(leaf.note.as_deref().unwrap().contains("falsified"));
}

#[test]
fn replay_is_deterministic() {
    let a = replay(TRAIN_SCRIPT, TRAIN).proof.to_json();
    let b = replay(TRAIN_SCRIPT, TRAIN).proof.to_json();
    assert_eq!(a, b);
}

#[test]
fn truncated_train_script_lists_open_goals() {
    let short: String = TRAIN_SCRIPT.lines().take(5).collect::<Vec<_>>().join("\n");
    let report = replay(&short, TRAIN);
    let ids: Vec<usize> = report.open.iter().map(|g| g.id).collect();
    assert_eq!(ids, vec![3]);
}

#[test]
fn loop_tae_premises_on_train() {
    let goal = premises("impR", &Sequent::goal(f(TRAIN)), Some("R0"), None).remove(0);
    let ps = premises("loop_tae", &goal, Some("R0"), Some("v < 100"));
    assert_eq!(ps.len(), 3);
    assert_eq!(ps[0], seq(&["a=0 & v=0"], &["v<=100"]));
    assert_eq!(ps[1].ante, vec![f("v<=100")]);
    assert_eq!(ps[2], seq(&["v<100"], &["v<100"]));
}

#[test]
fn script_on_trivial_goal() {
    assert!(replay("goal 0: close_arith", "0=0").closed());
    assert!(replay("auto_arith", "0=0").closed());
    assert!(!replay("", "0=0").closed());
}

#[test]
fn script_errors() {
    let bad: Result<ProofScript, _> = "goal x: id".parse();
    assert!(matches!(bad, Err(KernelError::ScriptSyntax { line: 1, .. })));
    let bad: Result<ProofScript, _> = "\ngoal 0: id at Q3".parse();
    assert!(matches!(bad, Err(KernelError::ScriptSyntax { line: 2, .. })));
    let s: ProofScript = "goal 0: impR at R0\ngoal 0: id at R0".parse().unwrap();
    let e = check_script(&reg(), &s, &Sequent::goal(f("x=1 -> x=1"))).unwrap_err();
    assert!(matches!(e, KernelError::ReplayMismatch { line: 2, .. }));
    let s: ProofScript = "goal 0: andR at R0".parse().unwrap();
    let e = check_script(&reg(), &s, &Sequent::goal(f("x=1 -> x=1"))).unwrap_err();
    assert!(matches!(e, KernelError::ReplayMismatch { line: 1, .. }));
    let s: ProofScript = "claim: 0=1\ngoal 0: close_arith".parse().unwrap();
    let e = check_script(&reg(), &s, &Sequent::goal(f("0=0"))).unwrap_err();
    assert!(matches!(e, KernelError::ClaimMismatch { line: 1, .. }));
    let s: ProofScript = "goal 7: id at R0".parse().unwrap();
    let e = check_script(&reg(), &s, &Sequent::goal(f("0=0"))).unwrap_err();
    assert!(matches!(e, KernelError::ReplayMismatch { line: 1, .. }));
}

#[test]
fn tae_test_rewrites_to_closure() {
    let ps = premises("tae_test", &seq(&["v<=100"], &["[?(v<100)] tae: v<100"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&["v<=100"], &["v<=100"])]);
}

#[test]
fn tae_choice_splits() {
    let ps = premises("tae_choice", &seq(&[], &["[x:=1 ++ x:=2] tae: x>0"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&[], &["[x:=1] tae: x>0 & [x:=2] tae: x>0"])]);
}

#[test]
fn tae_assign_closes_postcondition() {
    let ps = premises("tae_assign", &seq(&[], &["[a:=1] tae: v<100"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&[], &["v<=100 & [a:=1] v<=100"])]);
}

#[test]
fn tae_solve_dom_on_train_flow() {
    let ps = premises("tae_solve_dom", &seq(&[], &["[{x'=v, v'=1 & 0<=v & v<=100}] tae: v<100"]), Some("R0"), None);
    let expected = "v <= 100 & forall t (t > 0 -> forall s (s >= 0 & s <= t -> [x := 1/2*s^2 + s*v + x] [v := s + v] (0 <= v & v <= 100)) -> t + v <= 100 & (1 = 0 -> t + v < 100))";
    assert_eq!(ps, vec![seq(&[], &[expected])]);
}

#[test]
fn tae_solve_picks_fresh_time() {
    let ps = premises("tae_solve", &seq(&["t=1"], &["[{t'=1}] tae: t<5"]), Some("R0"), None);
    let succ = &ps[0].succ[0];
    let Formula::And(_, q) = succ else { panic!("{succ}") };
    let Formula::Forall(time, _) = &**q else { panic!("{q}") };
    assert_ne!(time.as_str(), "t");
}

#[test]
fn assignment_chain_without_order_is_rejected() {
    let e = run("dl_solve", &seq(&[], &["[{x'=y, y'=x}] x>0"]), Some("R0"), None);
    assert!(e.is_err());
}

#[test]
fn dl_axioms() {
    let ps = premises("dl_loop", &seq(&[], &["[{x:=x+1}*] x>0"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&[], &["x>0 & [x:=x+1][{x:=x+1}*] x>0"])]);
    let ps = premises("dl_diamond", &seq(&[], &["<x:=1> x>0"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&[], &["!([x:=1] !(x>0))"])]);
    let ps = premises("dl_test", &seq(&[], &["[?(v<100)][a:=1] a>0"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&[], &["v<100 -> [a:=1] a>0"])]);
    let ps = premises("dl_assign", &seq(&[], &["[a:=1] a>0"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&[], &["1>0"])]);
    assert!(run("dl_assign", &seq(&[], &["[x:=y] forall y (x>y)"]), Some("R0"), None).is_err());
}

#[test]
fn axioms_reject_wrong_shapes() {
    let e = run("tae_test", &seq(&[], &["[x:=1] tae: x>0"]), Some("R0"), None).unwrap_err();
    assert!(matches!(e, KernelError::ShapeMismatch { .. }));
    let e = run("tae_seq", &seq(&[], &["x>0"]), Some("R1"), None).unwrap_err();
    assert!(matches!(e, KernelError::BadPosition(_)));
}

#[test]
fn axioms_rewrite_both_ways() {
    let cases = [
        ("tae_test", "[?(v<100)] tae: v<100"),
        ("tae_choice", "[x:=1 ++ x:=2] tae: x>0"),
        ("tae_assign", "[a:=1] tae: v<100"),
        ("tae_seq", "[x:=1; y:=x] tae: y>0"),
        ("tae_loop", "[{x:=x+1}*] tae: x>0"),
        ("tae_solve", "[{x'=2}] tae: x<5"),
        ("tae_solve_dom", "[{x'=v, v'=1 & 0<=v & v<=100}] tae: v<100"),
        ("dl_assign", "[a:=1] a>0"),
        ("dl_test", "[?(v<100)] v>0"),
        ("dl_choice", "[x:=1 ++ x:=2] x>0"),
        ("dl_seq", "[x:=1; y:=x] y>0"),
        ("dl_loop", "[{x:=x+1}*] x>0"),
        ("dl_solve", "[{x'=1}] x>0"),
        ("dl_solve_dom", "[{x'=1 & x<3}] x>0"),
        ("dl_diamond", "<x:=1> x>0"),
    ];
    for (rule, text) in cases {
        let original = seq(&["x>=0"], &[&format!("y=0 -> {text}")]);
        let there = premises(rule, &original, Some("R0.1"), None).remove(0);
        assert_ne!(there, original, "{rule}");
        let back = premises(rule, &there, Some("R0.1"), Some(text)).remove(0);
        assert_eq!(back, original, "{rule}");
    }
}

#[test]
fn reverse_axiom_checks_the_claimed_left_side() {
    let there = premises("dl_test", &seq(&[], &["[?(v<100)] v>0"]), Some("R0"), None).remove(0);
    let e = run("dl_test", &there, Some("R0"), Some("[?(v<99)] v>0")).unwrap_err();
    assert!(matches!(e, KernelError::ShapeMismatch { .. }));
}

#[test]
fn k_tae_premises() {
    let ps = premises("K_tae", &seq(&[], &["[x:=1] tae: x>0 -> [x:=1] tae: x>=0"]), Some("R0"), None);
    assert!(ps.contains(&seq(&[], &["x>=0 -> x>=0"])), "{ps:?}");
    assert!(ps.contains(&seq(&[], &["[x:=1] tae: (x>0 -> x>=0)"])), "{ps:?}");
}

#[test]
fn cgg_closes() {
    let out = run("CGG", &seq(&["[x:=1] tae: x<1"], &["[x:=1] x<=1"]), Some("R0"), None).unwrap();
    assert!(out.is_closed());
    assert!(run("CGG", &seq(&["[x:=1] tae: x<1"], &["[x:=1] x<1"]), Some("R0"), None).is_err());
}

#[test]
fn id_and_propositional_rules() {
    assert!(run("id", &seq(&["x>0"], &["x>0"]), None, None).unwrap().is_closed());
    assert!(run("id", &seq(&["x>0"], &["x>1"]), None, None).is_err());
    let ps = premises("andR", &seq(&[], &["a=1 & b=1"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&[], &["a=1"]), seq(&[], &["b=1"])]);
    let ps = premises("impL", &seq(&["a=1 -> b=1"], &["c=1"]), Some("L0"), None);
    assert_eq!(ps, vec![seq(&[], &["c=1", "a=1"]), seq(&["b=1"], &["c=1"])]);
    let ps = premises("orL", &seq(&["a=1 | b=1"], &[]), Some("L0"), None);
    assert_eq!(ps.len(), 2);
    let ps = premises("notR", &seq(&[], &["!(a=1)"]), Some("R0"), None);
    assert_eq!(ps, vec![seq(&["a=1"], &[])]);
    let ps = premises("cut", &seq(&[], &["b=1"]), None, Some("a=1"));
    assert_eq!(ps, vec![seq(&[], &["b=1", "a=1"]), seq(&["a=1"], &["b=1"])]);
}

#[test]
fn quantifier_rules() {
    let ps = premises("allR", &seq(&["x=2"], &["forall x (x*0=0)"]), Some("R0"), None);
    assert_eq!(ps.len(), 1);
    assert!(!ps[0].succ[0].to_string().contains("x *"));
    let ps = premises("allL", &seq(&["forall x (x>=0)"], &["3>=0"]), Some("L0"), Some("3"));
    assert_eq!(ps, vec![seq(&["3>=0"], &["3>=0"])]);
    let ps = premises("existsR", &seq(&[], &["exists y (y>0)"]), Some("R0"), Some("1"));
    assert_eq!(ps, vec![seq(&[], &["1>0"])]);
}

#[test]
fn close_arith_examples() {
    assert_eq!(close_by_arith(&seq(&["a=0 & v=0"], &["v<=100"])), ArithOutcome::Closed);
    assert_eq!(close_by_arith(&seq(&[], &["0=0"])), ArithOutcome::Closed);
    match close_by_arith(&seq(&[], &["x^2>=x"])) {
        ArithOutcome::Open(why) => assert!(why.contains("1/2"), "{why}"),
        ArithOutcome::Closed => panic!("x^2 >= x is not valid"),
    }
}

#[test]
fn rewrite_examples() {
    let (g, side) = rewrite_in_context(&seq(&[], &["v<3"]), &"R0".parse().unwrap(), &f("v<3")).unwrap();
    assert_eq!(g, seq(&[], &["v<3"]));
    assert_eq!(close_by_arith(&side), ArithOutcome::Closed);

    let goal = seq(&[], &["x>1 -> 0<=v & v<=100"]);
    let (g, side) = rewrite_in_context(&goal, &"R0.1".parse().unwrap(), &f("v>=0 & 100-v>=0")).unwrap();
    assert_eq!(g, seq(&[], &["x>1 -> v>=0 & 100-v>=0"]));
    assert_eq!(side, seq(&[], &["0<=v & v<=100 <-> v>=0 & 100-v>=0"]));
    assert_eq!(close_by_arith(&side), ArithOutcome::Closed);

    let goal = seq(&[], &["forall x (x>0 -> v>0)"]);
    let e = rewrite_in_context(&goal, &"R0.0.1".parse().unwrap(), &f("v>0 & x*x>=0")).unwrap_err();
    assert!(matches!(e, KernelError::ContextError(_)));
}

#[test]
fn unknown_rule_and_missing_position() {
    assert!(matches!(run("nope", &seq(&[], &["0=0"]), None, None), Err(KernelError::UnknownRule(_))));
    assert!(run("andR", &seq(&[], &["0=0 & 1=1"]), None, None).is_err());
}

fn expansion_leaves(p: &Proof) -> Vec<Sequent> {
    let mut out: Vec<Sequent> = Vec::new();
    for id in p.open_goals() {
        let s = p.sequent(id).clone();
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn check_derived(rule: &str, goal: &Sequent, pos: &str, arg: Option<&str>) -> Vec<Sequent> {
    match run(rule, goal, Some(pos), arg).unwrap() {
        RuleOutcome::Premises { goals, expansion } => {
            let exp = expansion.expect("derived rules carry their expansion");
            assert_eq!(exp.sequent(0), goal);
            let leaves = expansion_leaves(&exp);
            assert_eq!(leaves.len(), goals.len(), "{rule}");
            assert!(goals.iter().all(|g| leaves.contains(g)), "{rule}");
            goals
        }
        RuleOutcome::Stuck(why) => panic!("{why}"),
    }
}

#[test]
fn derived_rules_match_their_expansions() {
    let ps = check_derived("M_tae", &seq(&[], &["[x:=1] tae: x<1 -> [x:=1] tae: x<2"]), "R0", None);
    assert_eq!(ps, vec![seq(&[], &["x<1 -> x<2"])]);

    let ps = check_derived("Ind_tae", &seq(&["x>=0"], &["[{x:=x+1}*] tae: x>0"]), "R0", None);
    assert_eq!(ps, vec![seq(&["x>=0"], &["[x:=x+1] tae: x>0"])]);

    let ps = check_derived("loop_tae", &seq(&["x=1"], &["[{x:=x+1}*] tae: x>=0"]), "R0", Some("x>0"));
    assert_eq!(ps, vec![seq(&["x=1"], &["x>=0"]), seq(&["x>=0"], &["[x:=x+1] tae: x>0"]), seq(&["x>0"], &["x>=0"])]);

    let ps = check_derived("Comp_tae", &seq(&[], &["x=1 -> [x:=x+1; x:=x+1] tae: x>0"]), "R0", None);
    assert_eq!(ps, vec![seq(&[], &["x=1 -> [x:=x+1] tae: x>0"]), seq(&[], &["x>=0 -> [x:=x+1] tae: x>0"])]);
}

#[test]
fn ind_tae_needs_closed_invariant_in_context() {
    assert!(run("Ind_tae", &seq(&[], &["[{x:=x+1}*] tae: x>0"]), Some("R0"), None).is_err());
}

#[test]
fn sequent_positions() {
    let s = seq(&["a=1"], &["b=1 -> [x:=1] tae: x>0"]);
    assert_eq!(s.at(&"R0.1.1".parse().unwrap()).unwrap(), &f("x>0"));
    assert_eq!(s.at(&"L0".parse().unwrap()).unwrap(), &f("a=1"));
    assert!(s.at(&"R0.2".parse().unwrap()).is_err());
    assert!("X0".parse::<Position>().is_err());
    assert_eq!("R0.1.1".parse::<Position>().unwrap().to_string(), "R0.1.1");
    assert_eq!(seq(&["a=1"], &[]).to_string(), "a = 1 |-");
    assert_eq!(seq(&[], &["a=1"]).to_string(), "|- a = 1");
}

#[test]
fn proof_json_shape() {
    let report = replay("goal 0: impR at R0\ngoal 1: id at R0", "x=1 -> x=1");
    let j = report.proof.to_json();
    assert_eq!(j["status"], "closed");
    assert_eq!(j["rule"], "impR");
    assert_eq!(j["children"][0]["id"], 1);
    assert_eq!(j["children"][0]["rule"], "id");
}

#[test]
fn every_rule_has_a_summary() {
    let r = reg();
    for rule in r.rules() {
        assert!(!rule.summary().is_empty(), "{}", rule.name());
    }
    for name in
        ["G_tae", "K_tae", "TopCl", "CGG", "G", "M", "M_tae", "Ind_tae", "loop_tae", "Comp_tae", "WL", "WR", "allR", "existsL"]
    {
        assert!(r.contains(name), "{name}");
    }
}

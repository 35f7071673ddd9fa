//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use pdtl_core::kernel::{check_script, ProofScript, RuleRegistry, Sequent};
use pdtl_core::poly::{closure, g_transform, ratio, to_normal_form};
use pdtl_core::syntax::{parse_model, Formula, VarId};
use pdtl_testkit::conservativity::{check_axiom_instances, Tally};
use pdtl_testkit::differential::{instance, run_corpus};
use pdtl_testkit::gen::{linear_formula, linear_program, normal_form, point, polynomial_program, xy_state};
use pdtl_testkit::traces::{check_composition, check_last_state};
use pdtl_testkit::transform::check_transform;
use pdtl_testkit::{draw, form, Outcome};
use proptest::prelude::*;
use serde_json::Value;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn model(name: &str) -> String {
    std::fs::read_to_string(format!("{}/models/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn simulate(args: &[&str]) -> Result<Value, String> {
    let out =
        Command::new(env!("CARGO_BIN_EXE_pdtl")).args(["--json", "simulate"]).args(args).output().map_err(|e| e.to_string())?;
    serde_json::from_slice(&out.stdout).map_err(|e| format!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn replay(model_file: &str, script: &str) -> Result<(bool, Vec<String>, Duration), String> {
    let m = parse_model(&model(model_file)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let script: ProofScript = script.parse().map_err(|e: pdtl_core::kernel::KernelError| e.to_string())?;
    let report = check_script(&RuleRegistry::standard(), &script, &Sequent::goal(m.problem)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let rules = report.proof.nodes().iter().filter_map(|n| n.step.as_ref().map(|s| s.rule.clone())).collect();
    Ok((report.closed(), rules, elapsed))
}

fn train_proof() -> Verdict {
    let (closed, rules, elapsed) = replay("train.pdtl", &model("train.pdtlp"))?;
    if !closed {
        return Err("train proof leaves goals open".into());
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("checking took {elapsed:?}"));
    }
    let used: BTreeSet<&str> = rules.iter().map(String::as_str).collect();
    let needed = [
        "loop_tae",
        "tae_seq",
        "tae_test",
        "tae_assign",
        "dl_seq",
        "dl_assign",
        "dl_test",
        "tae_solve_dom",
        "rewrite",
        "close_arith",
    ];
    if let Some(missing) = needed.iter().find(|r| !used.contains(*r)) {
        return Err(format!("proof never uses {missing}"));
    }
    if !used.contains("tae_choice") && !used.contains("dl_choice") {
        return Err("proof never splits the choice".into());
    }
    Ok(format!("{} rule applications in {elapsed:?}", rules.len()))
}

fn conjuncts(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => {
            out.insert(other.to_string());
        }
    }
}

fn transform_example() -> Verdict {
    let nf = to_normal_form(&form("t + v0 < 100")).map_err(|e| e.to_string())?;
    let got = g_transform(&nf, &VarId::named("t"));
    let (mut have, mut want) = (BTreeSet::new(), BTreeSet::new());
    conjuncts(&got, &mut have);
    conjuncts(&form("(1 = 0 -> t + v0 < 100) & t + v0 <= 100"), &mut want);
    if have != want {
        return Err(format!("transform gave {got}"));
    }
    let cl = closure(&form("v < 100")).formula;
    if cl != form("v <= 100") {
        return Err(format!("closure of v < 100 is {cl}"));
    }
    Ok(format!("{got}; closure {cl}"))
}

fn robot() -> Verdict {
    let failure = |v: &Value| -> Option<(String, String)> {
        v["traces"].as_array()?.iter().find(|t| t["verdict"]["result"] == "failed_continuous").map(|t| {
            let r = &t["verdict"]["report"];
            (
                r["measure"]["value"].as_str().unwrap_or("").to_string(),
                r["witnesses"][0]["local"].as_str().unwrap_or("").to_string(),
            )
        })
    };
    let safe = simulate(&["robot_safe"])?;
    if safe["verdict"] != "holds" || safe["statistical"] != false {
        return Err(format!("safe robot: {} (statistical {})", safe["verdict"], safe["statistical"]));
    }
    let measures: BTreeSet<&str> =
        safe["traces"].as_array().unwrap().iter().filter_map(|t| t["verdict"]["report"]["measure"]["value"].as_str()).collect();
    if measures != BTreeSet::from(["0"]) {
        return Err(format!("safe robot measures {measures:?}"));
    }
    let unsafe_ = simulate(&["robot_unsafe"])?;
    match failure(&unsafe_) {
        Some((m, w)) if unsafe_["verdict"] == "fails" && m == "1/2" && w == "[1/2, 1]" => Ok(format!("0 vs {m} on {w}")),
        other => Err(format!("unsafe robot: {} {other:?}", unsafe_["verdict"])),
    }
}

fn counter() -> Verdict {
    for n in 1..=3 {
        let unroll = n.to_string();
        let v = simulate(&["counter", "--unroll", &unroll])?;
        let hit = v["traces"].as_array().unwrap().iter().any(|t| t["verdict"]["result"] == "failed_discrete");
        if v["verdict"] != "fails" || !hit {
            return Err(format!("unroll {n}: {} without a discrete failure", v["verdict"]));
        }
    }
    let bundled = model("counter.pdtlp");
    let mut scripts = vec![bundled.clone()];
    for inv in ["x < 5", "x >= 0", "x <= 6", "true", "x = 5"] {
        scripts.push(bundled.replace("with x <= 5", &format!("with {inv}")));
    }
    for s in &scripts {
        if let Ok((true, _, _)) = replay("counter.pdtl", s) {
            return Err(format!("kernel closed the counter with\n{s}"));
        }
    }
    Ok(format!("fails for unroll 1..3; {} scripts stay open", scripts.len()))
}

fn transform_cases() -> Verdict {
    let cases = draw(&(normal_form(), (-12i64..=12, 1i64..=4)), 500, 1);
    for (nf, (a, b)) in &cases {
        check_transform(nf, &ratio(*a, *b))?;
    }
    Ok(format!("{} cases", cases.len()))
}

fn until_checked<T>(
    strategy: impl Strategy<Value = T>,
    want: usize,
    check: impl Fn(&T) -> Result<Outcome, String>,
) -> Result<usize, String> {
    let mut checked = 0;
    for seed in 0..200 {
        for case in draw(&strategy, 250, seed) {
            if check(&case)? == Outcome::Checked {
                checked += 1;
                if checked == want {
                    return Ok(checked);
                }
            }
        }
    }
    Err(format!("only {checked} usable cases"))
}

fn trace_properties() -> Verdict {
    let comp = (polynomial_program(), polynomial_program(), xy_state(), linear_formula(), any::<(usize, usize)>());
    let a = until_checked(comp, 500, |(p, q, w, phi, (i, j))| check_composition(p, q, w, phi, *i, *j))?;
    let last = (polynomial_program(), xy_state(), linear_formula(), any::<usize>());
    let b = until_checked(last, 500, |(p, w, phi, i)| check_last_state(p, w, phi, *i))?;
    Ok(format!("{a} composition and {b} last-state cases"))
}

fn conservativity() -> Verdict {
    let cases = draw(&(linear_program(), linear_formula(), prop::collection::vec(point(), 20)), 500, 3);
    let mut tally = Tally::default();
    for (program, post, points) in &cases {
        check_axiom_instances(program, post, points, &mut tally)?;
    }
    Ok(format!("{} programs, {} comparisons, {} undecided, {} sampled", cases.len(), tally.total(), tally.unknown, tally.sampled))
}

fn differential() -> Verdict {
    let corpus = draw(&instance(), 400, 7);
    let closed = run_corpus(&corpus)?;
    if closed < 50 {
        return Err(format!("only {closed} of {} claims closed", corpus.len()));
    }
    Ok(format!("{closed} of {} claims closed, all confirmed", corpus.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("train proof checks", train_proof),
        ("transform and closure examples", transform_example),
        ("robot measures", robot),
        ("counter fails and stays unproved", counter),
        ("transform property", transform_cases),
        ("trace properties", trace_properties),
        ("conservativity", conservativity),
        ("differential corpus", differential),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.1}s]", n + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

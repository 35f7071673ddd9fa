//! End-to-end runs of the `pdtl` binary on the bundled models.

use std::process::{Command, Output};

use serde_json::Value;

fn pdtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdtl")).args(args).env("PDTL_COLOR", "never").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = pdtl(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&out)));
    (code(&out), v)
}

fn schema() -> Value {
    serde_json::from_str(include_str!("../docs/simulation-report.schema.json")).unwrap()
}

fn required(schema: &Value) -> Vec<String> {
    schema["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect()
}

fn has_keys(v: &Value, keys: &[String], what: &str) {
    for k in keys {
        assert!(v.get(k).is_some(), "{what} lacks `{k}`: {v}");
    }
}

#[test]
fn exit_codes_follow_the_verdict() {
    assert_eq!(code(&pdtl(&["simulate", "robot_safe"])), 0);
    assert_eq!(code(&pdtl(&["simulate", "robot_unsafe"])), 1);
    assert_eq!(code(&pdtl(&["simulate", "counter"])), 1);
    assert_eq!(code(&pdtl(&["prove", "train", "train"])), 0);
    assert_eq!(code(&pdtl(&["prove", "train", "train_truncated"])), 1);
    assert_eq!(code(&pdtl(&["prove", "counter", "counter"])), 1);
    assert_eq!(code(&pdtl(&["parse", "train"])), 0);
}

#[test]
fn bad_input_exits_with_usage_or_parse_codes() {
    assert_eq!(code(&pdtl(&["frobnicate"])), 64);
    assert_eq!(code(&pdtl(&["simulate", "no_such_model"])), 64);
    assert_eq!(code(&pdtl(&["simulate", "train", "--unroll", "99"])), 64);
    assert_eq!(code(&pdtl(&["closure", "x <"])), 65);
    assert_eq!(code(&pdtl(&["--help"])), 0);
}

#[test]
fn bad_input_in_json_mode_reports_an_error_object() {
    let (c, v) = json(&["closure", "x <"]);
    assert_eq!(c, 65);
    assert_eq!(v["exit"], 65);
    assert!(v["error"].as_str().is_some());
}

#[test]
fn simulation_reports_are_reproducible() {
    for model in ["circle", "robot_unsafe", "counter"] {
        let a = pdtl(&["--json", "simulate", model, "--seed", "11", "--mc", "2000"]);
        let b = pdtl(&["--json", "simulate", model, "--seed", "11", "--mc", "2000"]);
        assert_eq!(a.stdout, b.stdout, "{model}");
    }
}

#[test]
fn simulation_reports_match_the_schema() {
    let s = schema();
    let defs = &s["$defs"];
    for model in ["train", "circle", "robot_unsafe", "counter", "pair_failing"] {
        let (_, v) = json(&["simulate", model, "--mc", "2000"]);
        has_keys(&v, &required(&s), model);
        has_keys(&v["config"], &required(&s["properties"]["config"]), model);
        assert!(["holds", "fails", "unknown"].contains(&v["verdict"].as_str().unwrap()));
        let traces = v["traces"].as_array().unwrap();
        assert!(!traces.is_empty());
        assert_eq!(v["seeds"]["per_trace"].as_array().unwrap().len(), traces.len());
        for t in traces {
            has_keys(t, &required(&defs["trace"]), model);
            assert!(t["seed"].as_str().unwrap().parse::<u64>().is_ok());
            for f in t["flows"].as_array().unwrap() {
                has_keys(f, &required(&defs["flow"]), model);
            }
            let tags: Vec<&str> = defs["verdict"]["oneOf"]
                .as_array()
                .unwrap()
                .iter()
                .map(|b| b["properties"]["result"]["const"].as_str().unwrap())
                .collect();
            assert!(tags.contains(&t["verdict"]["result"].as_str().unwrap()), "{}", t["verdict"]);
        }
    }
}

#[test]
fn robot_failure_is_located_exactly() {
    let (_, v) = json(&["simulate", "robot_unsafe"]);
    assert_eq!(v["verdict"], "fails");
    assert_eq!(v["statistical"], false);
    let failed: Vec<&Value> =
        v["traces"].as_array().unwrap().iter().filter(|t| t["verdict"]["result"] == "failed_continuous").collect();
    assert!(!failed.is_empty());
    let report = &failed[0]["verdict"]["report"];
    assert_eq!(report["measure"]["value"], "1/2");
    assert_eq!(report["witnesses"][0]["local"], "[1/2, 1]");
}

#[test]
fn counter_fails_on_a_discrete_state() {
    let (_, v) = json(&["simulate", "counter"]);
    let failed = v["traces"].as_array().unwrap().iter().find(|t| t["verdict"]["result"] == "failed_discrete").unwrap();
    assert_eq!(failed["verdict"]["state"]["x"], "6");
}

#[test]
fn start_state_honours_the_init_flag() {
    let (_, v) = json(&["simulate", "pair_strict", "--init", "x=3"]);
    assert_eq!(v["start"]["x"], "3");
    assert_eq!(code(&pdtl(&["simulate", "robot_safe", "--init", "a1=5"])), 64);
}

#[test]
fn proof_report_lists_open_goals() {
    let (c, v) = json(&["prove", "counter", "counter"]);
    assert_eq!(c, 1);
    assert_eq!(v["closed"], false);
    let open = v["open"].as_array().unwrap();
    assert_eq!(open.len(), 3);
    assert!(open.iter().all(|g| g["note"].as_str().unwrap().contains("falsified")));
}

#[test]
fn arithmetic_commands_print_results() {
    assert_eq!(stdout(&pdtl(&["closure", "v < 100"])).trim(), "v <= 100");
    assert!(stdout(&pdtl(&["solve-ode", "{x' = v, v' = a}"])).contains("x(t) = 1/2*a*t^2 + t*v + x"));
    let qe = pdtl(&["qe", "exists y (x < y & y < 1)"]);
    assert_eq!(code(&qe), 0);
    assert!(stdout(&qe).contains('1'));
}

#[test]
fn colour_is_controlled_by_the_environment() {
    let run = |mode: &str| {
        Command::new(env!("CARGO_BIN_EXE_pdtl")).args(["simulate", "robot_unsafe"]).env("PDTL_COLOR", mode).output().unwrap()
    };
    assert!(stdout(&run("always")).contains("\x1b["));
    assert!(!stdout(&run("never")).contains("\x1b["));
    assert!(!stdout(&run("auto")).contains("\x1b["));
}

#[test]
fn examples_lists_every_bundled_model() {
    let listing = stdout(&pdtl(&["examples"]));
    for name in ["train", "robot_safe", "robot_unsafe", "circle", "counter", "pair_strict", "pair_relaxed", "pair_failing"] {
        assert!(listing.contains(name), "{name} missing from\n{listing}");
    }
    let script = stdout(&pdtl(&["examples", "train"]));
    assert!(script.contains("problem:"));
}

#[test]
fn bundled_scripts_parse_and_models_print() {
    let (_, v) = json(&["parse", "train"]);
    assert!(v["problem"].as_str().unwrap().contains("tae:"));
}

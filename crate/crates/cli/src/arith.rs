//! `pdtl closure`, `pdtl qe` and `pdtl solve-ode`.

use pdtl_core::ode::solve_polynomial;
use pdtl_core::poly::{closure as closure_of, fm_eliminate};
use pdtl_core::syntax::{parse_ode, parse_state_formula, Formula};
use serde_json::json;

use crate::output::Out;
use crate::{Exit, Failure};

fn formula(text: &str) -> Result<Formula, Failure> {
    parse_state_formula(text).map_err(|e| Failure::parse(e.to_string()))
}

fn unsupported(message: String) -> Failure {
    Failure { exit: Exit::Unknown, message }
}

pub fn closure(out: &Out, text: &str) -> Result<Exit, Failure> {
    let f = formula(text)?;
    let cl = closure_of(&f);
    if out.json {
        out.json_value(&json!({
            "formula": f.to_string(),
            "closure": cl.formula.to_string(),
            "quantifier_free": cl.quantifier_free,
            "relaxed": cl.display.to_string(),
        }));
    } else {
        println!("{}", cl.formula);
        if !cl.quantifier_free {
            println!("relaxed (a superset): {}", cl.display);
        }
    }
    Ok(Exit::Success)
}

pub fn qe(out: &Out, text: &str) -> Result<Exit, Failure> {
    let f = formula(text)?;
    let qf = fm_eliminate(&f).map_err(|e| unsupported(e.to_string()))?;
    if out.json {
        out.json_value(&json!({ "formula": f.to_string(), "eliminated": qf.to_string() }));
    } else {
        println!("{qf}");
    }
    Ok(Exit::Success)
}

pub fn solve_ode(out: &Out, text: &str) -> Result<Exit, Failure> {
    let sys = parse_ode(text).map_err(|e| Failure::parse(e.to_string()))?;
    let sol = solve_polynomial(&sys).map_err(|e| unsupported(e.to_string()))?;
    let t = &sol.time;
    if out.json {
        let comps: serde_json::Map<String, serde_json::Value> =
            sol.components.iter().map(|(x, p)| (x.to_string(), json!(p.to_string()))).collect();
        out.json_value(&json!({ "system": text, "time": t.to_string(), "solution": comps }));
    } else {
        for (x, p) in &sol.components {
            println!("{x}({t}) = {p}");
        }
    }
    Ok(Exit::Success)
}

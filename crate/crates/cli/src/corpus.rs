//! The bundled models and proof scripts, addressable by name.

use std::path::Path;

use pdtl_core::kernel::ProofScript;
use pdtl_core::syntax::{parse_model, Model};
use serde_json::json;

use crate::output::Out;
use crate::{Exit, Failure};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../models/", $name)))),*]
    };
}

const MODELS: &[(&str, &str)] = bundled![
    "train.pdtl",
    "circle.pdtl",
    "robot_safe.pdtl",
    "robot_unsafe.pdtl",
    "counter.pdtl",
    "pair_strict.pdtl",
    "pair_relaxed.pdtl",
    "pair_failing.pdtl",
];

const SCRIPTS: &[(&str, &str)] = bundled!["train.pdtlp", "train_truncated.pdtlp", "robot.pdtlp", "counter.pdtlp"];

fn stem(file: &str) -> &str {
    file.rsplit_once('.').map_or(file, |(s, _)| s)
}

fn lookup(table: &[(&'static str, &'static str)], name: &str) -> Option<&'static str> {
    table.iter().find(|(f, _)| stem(f) == name || *f == name).map(|(_, text)| *text)
}

/// First comment line of a bundled file.
fn summary(text: &str) -> &str {
    text.lines().find_map(|l| l.trim().strip_prefix('#')).map_or("", str::trim)
}

/// Reads `arg` as a path if it exists, otherwise as a bundled name.
fn read(arg: &str, table: &[(&'static str, &'static str)], what: &str) -> Result<String, Failure> {
    if Path::new(arg).is_file() {
        return std::fs::read_to_string(arg).map_err(|e| Failure::usage(format!("cannot read {arg}: {e}")));
    }
    lookup(table, arg)
        .map(str::to_string)
        .ok_or_else(|| Failure::usage(format!("`{arg}` is neither a file nor a bundled {what}")))
}

pub fn load_model(arg: &str) -> Result<Model, Failure> {
    let text = read(arg, MODELS, "model")?;
    parse_model(&text).map_err(|e| Failure::parse(format!("{arg}: {e}")))
}

pub fn load_script(arg: &str) -> Result<ProofScript, Failure> {
    let text = read(arg, SCRIPTS, "script")?;
    text.parse().map_err(|e| Failure::parse(format!("{arg}: {e}")))
}

/// Bundled scripts written for a model: those whose name starts with the
/// model's name up to its first underscore.
fn scripts_for(model: &str) -> Vec<&'static str> {
    let family = model.split('_').next().unwrap_or(model);
    SCRIPTS.iter().map(|(f, _)| stem(f)).filter(|s| s.split('_').next() == Some(family)).collect()
}

pub fn examples(out: &Out, name: Option<&str>) -> Result<Exit, Failure> {
    match name {
        None => {
            let rows: Vec<(&str, &str, Vec<&str>)> =
                MODELS.iter().map(|(f, t)| (stem(f), summary(t), scripts_for(stem(f)))).collect();
            if out.json {
                let list: Vec<_> = rows.iter().map(|(n, s, sc)| json!({ "name": n, "summary": s, "scripts": sc })).collect();
                out.json_value(&json!({ "models": list }));
            } else {
                let width = rows.iter().map(|(n, ..)| n.len()).max().unwrap_or(0);
                for (n, s, sc) in rows {
                    let scripts = if sc.is_empty() { String::new() } else { format!("  [scripts: {}]", sc.join(", ")) };
                    println!("{n:width$}  {s}{scripts}");
                }
            }
        }
        Some(n) => {
            let text = lookup(MODELS, n)
                .or_else(|| lookup(SCRIPTS, n))
                .ok_or_else(|| Failure::usage(format!("no bundled model or script named `{n}`")))?;
            if out.json {
                out.json_value(&json!({ "name": n, "text": text }));
            } else {
                print!("{text}");
            }
        }
    }
    Ok(Exit::Success)
}

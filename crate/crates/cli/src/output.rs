//! Text and JSON output, with optional ANSI colour.

use std::io::{IsTerminal, Write};

use pdtl_core::syntax::Model;
use serde_json::{json, Value};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tone {
    Good,
    Bad,
    Unsure,
}

pub struct Out {
    pub json: bool,
    color: bool,
}

impl Out {
    pub fn new(json: bool) -> Out {
        let color = match std::env::var("PDTL_COLOR").as_deref() {
            Ok("always") => true,
            Ok("never") => false,
            _ => std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none(),
        };
        Out { json, color: color && !json }
    }

    pub fn paint(&self, text: &str, tone: Tone) -> String {
        if !self.color {
            return text.to_string();
        }
        let code = match tone {
            Tone::Good => "32",
            Tone::Bad => "31",
            Tone::Unsure => "33",
        };
        format!("\x1b[1;{code}m{text}\x1b[0m")
    }

    pub fn json_value(&self, v: &Value) {
        let text = serde_json::to_string_pretty(v).expect("JSON values serialise");
        let _ = writeln!(std::io::stdout().lock(), "{text}");
    }

    pub fn failure(&self, f: &Failure) {
        if self.json {
            self.json_value(&json!({ "error": f.message, "exit": f.exit as u8 }));
        } else {
            eprintln!("{}: {}", self.paint("error", Tone::Bad), f.message);
        }
    }

    pub fn parse_report(&self, model: &Model) {
        let vars: Vec<String> = model.vars.iter().map(|v| v.to_string()).collect();
        if self.json {
            self.json_value(&json!({ "vars": vars, "problem": model.problem.to_string() }));
        } else {
            println!("vars: {}", vars.join(", "));
            println!("problem: {}", model.problem);
        }
    }
}

//! Line-oriented proof scripts:
//!
//! ```text
//! # comment
//! claim: <formula>
//! goal <n>: <rule> [at <position>] [with <argument>]
//! auto_arith
//! ```
//!
//! Goal 0 is the claim; every rule application numbers its new subgoals
//! consecutively after all existing goals. `auto_arith` tries `close_arith`
//! on every open goal.

use std::str::FromStr;

use super::proof::Proof;
use super::registry::{RuleArg, RuleRegistry};
use super::{KernelError, Position, Sequent};
use crate::syntax::{parse_state_formula, Formula};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    pub line: usize,
    /// `None` for `auto_arith`.
    pub goal: Option<usize>,
    pub rule: String,
    pub position: Option<Position>,
    pub arg: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProofScript {
    pub claim: Option<(usize, Formula)>,
    pub steps: Vec<ScriptStep>,
}

pub const AUTO_ARITH: &str = "auto_arith";

impl FromStr for ProofScript {
    type Err = KernelError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut script = ProofScript::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| KernelError::ScriptSyntax { line, message };
            if let Some(rest) = content.strip_prefix("claim:") {
                let f = parse_state_formula(rest).map_err(|e| err(e.to_string()))?;
                script.claim = Some((line, f));
                continue;
            }
            if content == AUTO_ARITH || content == "auto-arith" {
                script.steps.push(ScriptStep { line, goal: None, rule: AUTO_ARITH.into(), position: None, arg: None });
                continue;
            }
            let rest =
                content.strip_prefix("goal").ok_or_else(|| err(format!("expected `goal <n>: <rule>`, found `{content}`")))?;
            let (num, rest) = rest.split_once(':').ok_or_else(|| err("missing `:` after the goal number".into()))?;
            let goal: usize = num.trim().parse().map_err(|_| err(format!("`{}` is not a goal number", num.trim())))?;
            let rest = rest.trim();
            let (rule, mut rest) = split_word(rest);
            if rule.is_empty() {
                return Err(err("missing rule name".into()));
            }
            let mut position = None;
            if let Some(after) = keyword(rest, "at") {
                let (p, r) = split_word(after);
                position = Some(p.parse::<Position>().map_err(|e| err(e.to_string()))?);
                rest = r;
            }
            let mut arg = None;
            if let Some(after) = keyword(rest, "with") {
                arg = Some(after.trim().to_string());
                rest = "";
            }
            if !rest.trim().is_empty() {
                return Err(err(format!("unexpected `{}`", rest.trim())));
            }
            script.steps.push(ScriptStep { line, goal: Some(goal), rule: rule.to_string(), position, arg });
        }
        Ok(script)
    }
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim_start()),
        None => (s, ""),
    }
}

fn keyword<'a>(s: &'a str, kw: &str) -> Option<&'a str> {
    let (w, rest) = split_word(s);
    (w == kw).then_some(rest)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenGoal {
    pub id: usize,
    pub sequent: Sequent,
    pub note: Option<String>,
}

/// Result of replaying a script.
#[derive(Debug, Clone)]
pub struct ScriptReport {
    pub proof: Proof,
    pub steps: usize,
    pub open: Vec<OpenGoal>,
}

impl ScriptReport {
    pub fn closed(&self) -> bool {
        self.open.is_empty()
    }
}

/// Replays `script` against the goal `claim`.
pub fn check_script(reg: &RuleRegistry, script: &ProofScript, claim: &Sequent) -> Result<ScriptReport, KernelError> {
    if let Some((line, f)) = &script.claim {
        let stated = Sequent::goal(f.clone());
        if &stated != claim {
            return Err(KernelError::ClaimMismatch { line: *line, expected: claim.to_string(), found: stated.to_string() });
        }
    }
    let mut proof = Proof::new(claim.clone());
    for step in &script.steps {
        let replay = |source: KernelError| KernelError::ReplayMismatch { line: step.line, source: Box::new(source) };
        match step.goal {
            None => {
                for id in proof.open_goals() {
                    proof.apply(reg, id, "close_arith", None, RuleArg::None).map_err(replay)?;
                }
            }
            Some(goal) => {
                let kind = reg.get(&step.rule).map_err(replay)?.arg_kind();
                let arg = RuleArg::parse(kind, step.arg.as_deref()).map_err(replay)?;
                proof.apply(reg, goal, &step.rule, step.position.clone(), arg).map_err(replay)?;
            }
        }
    }
    let open = proof
        .open_goals()
        .into_iter()
        .map(|id| {
            let n = proof.node(id).expect("open goal exists");
            OpenGoal { id, sequent: n.sequent.clone(), note: n.note.clone() }
        })
        .collect();
    Ok(ScriptReport { proof, steps: script.steps.len(), open })
}

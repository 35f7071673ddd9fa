use serde_json::{json, Value};

use super::registry::{RuleArg, RuleOutcome, RuleRegistry};
use super::{KernelError, Position, Sequent};

/// A rule application recorded on a proof node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: String,
    pub position: Option<Position>,
    pub arg: RuleArg,
}

impl std::fmt::Display for Step {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.rule)?;
        if let Some(p) = &self.position {
            write!(f, " at {p}")?;
        }
        if !self.arg.is_none() {
            write!(f, " with {}", self.arg)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ProofNode {
    pub id: usize,
    pub sequent: Sequent,
    pub step: Option<Step>,
    pub children: Vec<usize>,
    /// Why the last attempt on an open goal failed, e.g. a falsifying state.
    pub note: Option<String>,
    /// The primitive derivation behind a derived-rule step.
    pub expansion: Option<Box<Proof>>,
}

/// A proof tree. Node 0 is the root; nodes are numbered in creation order.
#[derive(Debug, Clone)]
pub struct Proof {
    nodes: Vec<ProofNode>,
}

impl Proof {
    pub fn new(root: Sequent) -> Self {
        Proof { nodes: vec![ProofNode { id: 0, sequent: root, step: None, children: Vec::new(), note: None, expansion: None }] }
    }

    pub fn root(&self) -> &ProofNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[ProofNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Option<&ProofNode> {
        self.nodes.get(id)
    }

    pub fn sequent(&self, id: usize) -> &Sequent {
        &self.nodes[id].sequent
    }

    /// Applies a rule to the open goal `goal` and returns the ids of the new
    /// subgoals. A rule that applies but cannot discharge the goal leaves it open
    /// with a note and returns no ids.
    pub fn apply(
        &mut self,
        reg: &RuleRegistry,
        goal: usize,
        rule: &str,
        position: Option<Position>,
        arg: RuleArg,
    ) -> Result<Vec<usize>, KernelError> {
        let node = self.nodes.get(goal).ok_or(KernelError::NoSuchGoal(goal))?;
        if node.step.is_some() {
            return Err(KernelError::GoalNotOpen(goal));
        }
        let outcome = reg.apply(rule, &node.sequent, position.as_ref(), &arg)?;
        match outcome {
            RuleOutcome::Stuck(reason) => {
                self.nodes[goal].note = Some(reason);
                Ok(Vec::new())
            }
            RuleOutcome::Premises { goals, expansion } => {
                let first = self.nodes.len();
                let ids: Vec<usize> = (first..first + goals.len()).collect();
                for (id, s) in ids.iter().zip(goals) {
                    self.nodes.push(ProofNode {
                        id: *id,
                        sequent: s,
                        step: None,
                        children: Vec::new(),
                        note: None,
                        expansion: None,
                    });
                }
                let node = &mut self.nodes[goal];
                node.step = Some(Step { rule: rule.to_string(), position, arg });
                node.children = ids.clone();
                node.note = None;
                node.expansion = expansion.map(Box::new);
                Ok(ids)
            }
        }
    }

    pub fn is_open(&self, id: usize) -> bool {
        self.nodes.get(id).is_some_and(|n| n.step.is_none())
    }

    /// Leaves without a rule application, in id order.
    pub fn open_goals(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.step.is_none()).map(|n| n.id).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.open_goals().is_empty()
    }

    /// Nested JSON: `{id, sequent, rule, status, children}` plus position,
    /// argument, note and expansion when present.
    pub fn to_json(&self) -> Value {
        self.node_json(0)
    }

    fn node_json(&self, id: usize) -> Value {
        let n = &self.nodes[id];
        let children: Vec<Value> = n.children.iter().map(|c| self.node_json(*c)).collect();
        let status = if n.step.is_none() {
            "open"
        } else if self.subtree_closed(id) {
            "closed"
        } else {
            "partial"
        };
        let mut v = json!({
            "id": n.id,
            "sequent": n.sequent.to_string(),
            "rule": n.step.as_ref().map(|s| s.rule.clone()),
            "status": status,
            "children": children,
        });
        let obj = v.as_object_mut().expect("object literal");
        if let Some(s) = &n.step {
            if let Some(p) = &s.position {
                obj.insert("position".into(), json!(p.to_string()));
            }
            if !s.arg.is_none() {
                obj.insert("arg".into(), json!(s.arg.to_string()));
            }
        }
        if let Some(note) = &n.note {
            obj.insert("note".into(), json!(note));
        }
        if let Some(e) = &n.expansion {
            obj.insert("expansion".into(), e.to_json());
        }
        v
    }

    fn subtree_closed(&self, id: usize) -> bool {
        let n = &self.nodes[id];
        n.step.is_some() && n.children.iter().all(|c| self.subtree_closed(*c))
    }
}

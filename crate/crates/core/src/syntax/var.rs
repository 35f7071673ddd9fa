use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// Words the parser reserves; they can never name a variable.
pub const KEYWORDS: &[&str] = &["true", "false", "forall", "exists", "tae"];

/// A program variable name. Ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid variable name `{0}`")]
pub struct InvalidVarId(pub String);

impl VarId {
    pub fn new(name: &str) -> Result<Self, InvalidVarId> {
        if is_valid_name(name) {
            Ok(VarId(Arc::from(name)))
        } else {
            Err(InvalidVarId(name.to_string()))
        }
    }

    /// Panics on an invalid name. Meant for literals in code and tests.
    pub fn named(name: &str) -> Self {
        Self::new(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// First name of the form `base`, `base1`, `base2`, ... rejected by `taken`.
    pub fn fresh(base: &str, taken: impl Fn(&VarId) -> bool) -> VarId {
        let first = VarId::named(base);
        if !taken(&first) {
            return first;
        }
        (1..).map(|i| VarId::named(&format!("{base}{i}"))).find(|v| !taken(v)).expect("unbounded supply of names")
    }
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&name)
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for VarId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

//! The five canonical threat classes of the layer-2 classifier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Threat class assigned by layer 2. `Valid` marks a benign anomaly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackClass {
    Valid,
    Sqli,
    Xss,
    PathTraversal,
    CommandInjection,
}

impl AttackClass {
    /// All classes, in canonical order.
    pub const ALL: [AttackClass; 5] = [
        AttackClass::Valid,
        AttackClass::Sqli,
        AttackClass::Xss,
        AttackClass::PathTraversal,
        AttackClass::CommandInjection,
    ];

    /// The stable wire name (`valid`, `sqli`, `xss`, `path_traversal`,
    /// `command_injection`).
    pub fn name(&self) -> &'static str {
        match self {
            AttackClass::Valid => "valid",
            AttackClass::Sqli => "sqli",
            AttackClass::Xss => "xss",
            AttackClass::PathTraversal => "path_traversal",
            AttackClass::CommandInjection => "command_injection",
        }
    }

    /// Whether this class counts as a threat in the combined decision
    /// logic (everything except `valid`).
    pub fn is_threat(&self) -> bool {
        !matches!(self, AttackClass::Valid)
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Error for an unrecognized class name.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown attack class: {0:?}")]
pub struct UnknownClass(pub String);

impl FromStr for AttackClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackClass::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

//! Named pass/fail records shared by the verification reports.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// Concrete counterexamples, capped in length.
    pub witnesses: Vec<String>,
}

pub const MAX_WITNESSES: usize = 8;

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }

    pub fn with_witnesses(mut self, witnesses: Vec<String>) -> Self {
        self.witnesses = witnesses.into_iter().take(MAX_WITNESSES).collect();
        self
    }
}

/// Whether every check passes or is waived by name.
pub fn all_pass(checks: &[Check], waived: &[String]) -> bool {
    checks
        .iter()
        .all(|c| c.pass || waived.iter().any(|w| w == &c.name))
}

/// Names of failing checks that are not waived.
pub fn unwaived_failures(checks: &[Check], waived: &[String]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.pass && !waived.iter().any(|w| w == &c.name))
        .map(|c| c.name.clone())
        .collect()
}

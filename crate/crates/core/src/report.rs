//! Verification reports: one line per check with its worst violation.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub check: String,
    pub max_violation: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(check: impl Into<String>, max_violation: f64, threshold: f64) -> Self {
        // NaN never passes.
        let pass = max_violation <= threshold;
        Check { check: check.into(), max_violation, threshold, pass }
    }

    /// A check that must hold exactly, e.g. a dimension count.
    pub fn exact(check: impl Into<String>, expected: usize, got: usize) -> Self {
        let diff = (expected as f64 - got as f64).abs();
        Check::new(format!("{} (expected {expected}, got {got})", check.into()), diff, 0.0)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: max violation {:.3e} (threshold {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.max_violation,
            self.threshold
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: u32,
    pub checks: Vec<Check>,
}

impl Default for Report {
    fn default() -> Self {
        Report { schema_version: SCHEMA_VERSION, checks: Vec::new() }
    }
}

impl Report {
    pub fn new(checks: Vec<Check>) -> Self {
        Report { schema_version: SCHEMA_VERSION, checks }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_violation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_violation).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

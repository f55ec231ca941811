//! Structured pass/fail records shared by the analyzers and the CLI.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>, residual: f64) -> Self {
        Check { name: name.into(), status: CheckStatus::Pass, residual: Some(residual), witness: None }
    }

    pub fn fail(name: impl Into<String>, residual: f64, witness: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: CheckStatus::Fail,
            residual: Some(residual),
            witness: Some(witness.into()),
        }
    }

    pub fn from_residual(name: impl Into<String>, residual: f64, tol: f64, witness: &str) -> Self {
        if residual <= tol {
            Check::pass(name, residual)
        } else {
            Check::fail(name, residual, witness)
        }
    }

    pub fn inconclusive(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: CheckStatus::Inconclusive,
            residual: None,
            witness: Some(reason.into()),
        }
    }
}

/// A named batch of checks. `wall_time` is informational only and is not
/// serialized, so identical inputs produce byte-identical reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        VerificationReport { schema: 1, suite: suite.into(), checks: Vec::new(), wall_time: 0.0 }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().filter_map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.wall_time += other.wall_time;
    }
}

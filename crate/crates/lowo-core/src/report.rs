//! Clause-by-clause verification reports.
//!
//! Every verifier in this crate re-checks a produced artifact from scratch
//! and answers with a [`VerifyReport`]: one [`ClauseResult`] per contract
//! clause, each carrying a human-readable detail line. A report is `ok`
//! exactly when every clause passed. Clause failures are ordinary data —
//! only resource exhaustion inside a sub-check surfaces as an error.

use serde::{Deserialize, Serialize};

/// One verified clause of an artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseResult {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

/// Verification report: every clause, pass or fail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Which artifact kind was verified (e.g. the producing algorithm).
    pub algorithm: String,
    pub ok: bool,
    pub clauses: Vec<ClauseResult>,
}

impl VerifyReport {
    pub fn new(algorithm: &str) -> Self {
        VerifyReport {
            algorithm: algorithm.to_string(),
            ok: true,
            clauses: Vec::new(),
        }
    }

    /// Record one clause; the report stays `ok` only while all clauses pass.
    pub fn push(&mut self, name: &str, ok: bool, detail: String) {
        self.ok &= ok;
        self.clauses.push(ClauseResult {
            name: name.to_string(),
            ok,
            detail,
        });
    }
}

//! Check records shared by every verifier.

use std::fmt;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: Value,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
    pub elapsed_ms: f64,
}

/// Ordered list of check records. The report passes iff every record does.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
}

/// Result of a single check body: what was expected, what was observed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl Outcome {
    pub fn new(expected: impl ToString, actual: impl ToString, pass: bool) -> Self {
        Self {
            expected: expected.to_string(),
            actual: actual.to_string(),
            pass,
        }
    }

    /// Passes iff `expected == actual`.
    pub fn equal<T: PartialEq + fmt::Display>(expected: T, actual: T) -> Self {
        let pass = expected == actual;
        Self::new(expected, actual, pass)
    }

    /// `counterexample` is `None` when the property held everywhere.
    pub fn holds(claim: &str, counterexample: Option<String>) -> Self {
        match counterexample {
            None => Self::new(claim, claim, true),
            Some(c) => Self::new(claim, format!("counterexample: {c}"), false),
        }
    }
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.records.iter().find(|r| !r.pass)
    }

    /// Runs `body`, timing it, and appends the record.
    pub fn check<F>(&mut self, name: &str, params: Value, body: F) -> bool
    where
        F: FnOnce() -> Outcome,
    {
        let start = Instant::now();
        let outcome = body();
        let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        let pass = outcome.pass;
        self.records.push(CheckRecord {
            name: name.to_string(),
            params,
            expected: outcome.expected,
            actual: outcome.actual,
            pass,
            elapsed_ms,
        });
        pass
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(
                f,
                "[{}] {} {} expected={} actual={} ({:.1} ms)",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.params,
                r.expected,
                r.actual,
                r.elapsed_ms
            )?;
        }
        Ok(())
    }
}

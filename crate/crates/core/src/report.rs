//! Versioned JSON report envelope and the generic check report.

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "definability-lab/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Pass and fail are definite; combining with inconclusive is
    /// inconclusive unless something already failed.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// Outcome of a verification routine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    /// False when some input could not be fully resolved (factoring).
    pub complete: bool,
    /// Number of individual cases examined.
    pub checked: u64,
    pub failures: Vec<String>,
    pub details: serde_json::Value,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            verdict: Verdict::Pass,
            complete: true,
            checked: 0,
            failures: vec![],
            details: serde_json::Value::Null,
        }
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
        self.verdict = Verdict::Fail;
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }
}

/// Wraps a payload with the schema tag.
pub fn envelope(command: &str, payload: serde_json::Value) -> serde_json::Value {
    serde_json::json!({ "schema": SCHEMA, "command": command, "result": payload })
}

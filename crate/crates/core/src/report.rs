//! Structured verifier outcomes, serialized as
//! `{claim, status, counterexample?, lhs, rhs, depth, parameters}`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    BudgetExceeded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::BudgetExceeded => "budget-exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Value>,
    pub lhs: Value,
    pub rhs: Value,
    pub depth: usize,
    pub parameters: BTreeMap<String, Value>,
}

impl VerificationReport {
    pub fn new(claim: impl Into<String>, status: Status, depth: usize) -> Self {
        Self {
            claim: claim.into(),
            status,
            counterexample: None,
            lhs: Value::Null,
            rhs: Value::Null,
            depth,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_sides(mut self, lhs: impl Into<Value>, rhs: impl Into<Value>) -> Self {
        self.lhs = lhs.into();
        self.rhs = rhs.into();
        self
    }

    pub fn with_counterexample(mut self, counterexample: impl Into<Value>) -> Self {
        self.counterexample = Some(counterexample.into());
        self
    }

    pub fn with_parameter(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_owned(), value.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (depth {})", self.claim, self.status, self.depth)?;
        if !self.lhs.is_null() || !self.rhs.is_null() {
            write!(f, "\n  lhs = {}\n  rhs = {}", self.lhs, self.rhs)?;
        }
        if let Some(c) = &self.counterexample {
            write!(f, "\n  counterexample = {c}")?;
        }
        for (k, v) in &self.parameters {
            write!(f, "\n  {k} = {v}")?;
        }
        Ok(())
    }
}

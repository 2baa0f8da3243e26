//! Named pass/fail results shared by every verifier and by the CLI reports.

use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Recorded but not counted towards pass/fail.
    Info,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub witness: Option<Value>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::Pass, witness: None }
    }

    pub fn fail(name: impl Into<String>, witness: Value) -> Self {
        Self { name: name.into(), status: Status::Fail, witness: Some(witness) }
    }

    pub fn info(name: impl Into<String>, witness: Option<Value>) -> Self {
        Self { name: name.into(), status: Status::Info, witness }
    }

    /// Pass when `witness` is `None`, fail otherwise.
    pub fn from_witness(name: impl Into<String>, witness: Option<Value>) -> Self {
        match witness {
            None => Self::pass(name),
            Some(w) => Self::fail(name, w),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({"name": self.name, "status": self.status.as_str()});
        if let Some(w) = &self.witness {
            v["witness"] = w.clone();
        }
        v
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}

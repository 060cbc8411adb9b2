//! Report entries and the JSON document written at the end of a run.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use va_wightman::Error;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub name: String,
    pub suite: &'static str,
    /// The statement the check exercises.
    pub anchor: &'static str,
    pub status: Status,
    pub deviation: Option<f64>,
    pub runtime_s: f64,
    pub details: Value,
}

/// What a check hands back before timing and classification.
pub struct Outcome {
    pub pass: bool,
    pub deviation: Option<f64>,
    pub details: Value,
}

impl Outcome {
    pub fn exact(pass: bool, details: Value) -> Self {
        Outcome { pass, deviation: None, details }
    }

    pub fn within(deviation: f64, tolerance: f64, details: Value) -> Self {
        Outcome { pass: deviation < tolerance, deviation: Some(deviation), details }
    }
}

/// Times `check` and classifies its result. Truncation signals become
/// `inconclusive`; any other error is a failure.
pub fn run_check(
    suite: &'static str,
    name: impl Into<String>,
    anchor: &'static str,
    check: impl FnOnce() -> Result<Outcome, Error>,
) -> Entry {
    let start = Instant::now();
    let result = check();
    let runtime_s = start.elapsed().as_secs_f64();
    let (status, deviation, details) = match result {
        Ok(o) => (if o.pass { Status::Pass } else { Status::Fail }, o.deviation, o.details),
        Err(e @ (Error::Inconclusive(_) | Error::Truncation { .. })) => {
            (Status::Inconclusive, None, json!({ "reason": e.to_string() }))
        }
        Err(e) => (Status::Fail, None, json!({ "error": e.to_string() })),
    };
    Entry { name: name.into(), suite, anchor, status, deviation, runtime_s, details }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub model: String,
    pub config: RunConfig,
    pub summary: Summary,
    pub checks: Vec<Entry>,
    /// Names of the checks whose result the truncation could not decide.
    pub inconclusive: Vec<String>,
}

impl Report {
    pub fn new(model: String, config: RunConfig, checks: Vec<Entry>) -> Self {
        let count = |s: Status| checks.iter().filter(|e| e.status == s).count();
        let summary =
            Summary { passed: count(Status::Pass), failed: count(Status::Fail), inconclusive: count(Status::Inconclusive) };
        let inconclusive = checks.iter().filter(|e| e.status == Status::Inconclusive).map(|e| e.name.clone()).collect();
        Report { schema_version: SCHEMA_VERSION, model, config, summary, checks, inconclusive }
    }

    pub fn failed(&self) -> bool {
        self.summary.failed > 0
    }
}

//! JSON file formats: task-set problems, solutions and benchmark summaries.
//!
//! Output is UTF-8 with LF line endings. Derived numbers (objectives,
//! timings, gaps) are rounded to six significant digits; task-set values
//! are written at full precision so a file can be read back losslessly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analysis::ResponseTimeAnalysis;
use crate::bench::{BenchReport, Generated};
use crate::model::{validate_taskset, ObjectiveWeights, Task, TaskSet, VariableBounds};
use crate::objective::ControlObjective;
use crate::orchestrator::Solution;
use crate::problem::Problem;
use crate::report::round_sig6;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed task-set file: {0}")]
    Parse(String),
    #[error("field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

fn field(field: impl Into<String>, reason: impl Into<String>) -> IoError {
    IoError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

/// On-disk task-set file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub tasks: Vec<Task<f64>>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub period_min: Vec<f64>,
    pub period_max: Vec<f64>,
}

/// A validated problem instance read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub taskset: TaskSet<f64>,
    pub weights: ObjectiveWeights<f64>,
    pub bounds: VariableBounds<f64>,
}

impl Instance {
    /// Problem with the built-in response-time analysis and control objective.
    pub fn problem(&self) -> Problem<'_, f64> {
        Problem {
            taskset: &self.taskset,
            weights: &self.weights,
            bounds: &self.bounds,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        }
    }
}

impl ProblemFile {
    pub fn new(ts: &TaskSet<f64>, w: &ObjectiveWeights<f64>, b: &VariableBounds<f64>) -> Self {
        ProblemFile {
            tasks: ts.tasks.clone(),
            alpha: w.alpha.clone(),
            beta: w.beta.clone(),
            period_min: b.period_min.clone(),
            period_max: b.period_max.clone(),
        }
    }

    pub fn from_generated(g: &Generated<f64>) -> Self {
        Self::new(&g.taskset, &g.weights, &g.bounds)
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Checks lengths, weights and every task-set invariant. Errors name the
    /// first offending field.
    pub fn into_instance(self) -> Result<Instance, IoError> {
        let n = self.tasks.len();
        if n == 0 {
            return Err(field("tasks", "must contain at least one task"));
        }
        for (name, v) in [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("period_min", &self.period_min),
            ("period_max", &self.period_max),
        ] {
            if v.len() != n {
                return Err(field(name, format!("has length {}, expected {n}", v.len())));
            }
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(field(format!("{name}[{i}]"), "must be finite"));
            }
        }
        for (i, t) in self.tasks.iter().enumerate() {
            for (name, x) in [("wcet", t.wcet), ("period", t.period), ("deadline", t.deadline)] {
                if !x.is_finite() {
                    return Err(field(format!("tasks[{i}].{name}"), "must be finite"));
                }
            }
        }
        let weights = ObjectiveWeights::new(self.alpha, self.beta).map_err(|e| match e {
            crate::model::ModelError::NonPositiveWeight { what, id } => {
                field(format!("{what}[{id}]"), "must be positive")
            }
            other => field("alpha", other.to_string()),
        })?;
        let taskset = TaskSet::new(self.tasks);
        let bounds = VariableBounds {
            period_min: self.period_min,
            period_max: self.period_max,
        };
        let violations = validate_taskset(&taskset, &bounds);
        if let Some(v) = violations.first() {
            return Err(field(violation_field(v), v.to_string()));
        }
        Ok(Instance {
            taskset,
            weights,
            bounds,
        })
    }

    pub fn to_json(&self) -> String {
        finish(serde_json::to_value(self).expect("task-set file serializes"))
    }
}

fn violation_field(v: &crate::model::Violation) -> String {
    use crate::model::Violation::*;
    match *v {
        IdMismatch { position, .. } => format!("tasks[{position}].id"),
        NonPositiveWcet(i) => format!("tasks[{i}].wcet"),
        PeriodBelowWcet(i) => format!("tasks[{i}].period"),
        NonPositiveDeadline(i) | DeadlineNotImplicit(i) => format!("tasks[{i}].deadline"),
        PrioritiesNotPermutation => "tasks[].priority".into(),
        BoundsLength { .. } => "period_min".into(),
        BoundsInverted(i) | MinBelowWcet(i) => format!("period_min[{i}]"),
        PeriodBelowMin(i) | PeriodAboveMax(i) => format!("tasks[{i}].period"),
    }
}

/// Reads and validates a task-set file.
pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    ProblemFile::read(path)?.into_instance()
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n.as_f64() {
                *v = Value::from(round_sig6(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn finish(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

/// Solution JSON; the embedded task set keeps the instance's weights and bounds.
pub fn solution_json(sol: &Solution<f64>, instance: &Instance) -> String {
    let mut trace = serde_json::to_value(&sol.trace).expect("trace serializes");
    round_numbers(&mut trace);
    let objective = if sol.objective.is_finite() {
        Value::from(round_sig6(sol.objective))
    } else {
        Value::Null
    };
    let taskset = ProblemFile::new(&sol.taskset, &instance.weights, &instance.bounds);
    let mut out = serde_json::Map::new();
    out.insert("objective".into(), objective);
    out.insert("status".into(), Value::from(sol.status.as_str()));
    out.insert(
        "taskset".into(),
        serde_json::to_value(taskset).expect("task-set file serializes"),
    );
    out.insert("trace".into(), trace);
    finish(Value::Object(out))
}

/// Benchmark metadata and summary; per-set records go to the CSV.
pub fn summary_json(report: &BenchReport) -> String {
    let mut out = serde_json::Map::new();
    out.insert(
        "metadata".into(),
        serde_json::to_value(&report.metadata).expect("metadata serializes"),
    );
    out.insert(
        "summary".into(),
        serde_json::to_value(&report.summary).expect("summary serializes"),
    );
    let mut v = Value::Object(out);
    round_numbers(&mut v);
    finish(v)
}

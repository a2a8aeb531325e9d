//! Periodic task systems and the hybrid design-variable vector.
//!
//! A [`TaskSet`] hosts both variable blocks: the periods (continuous) and
//! the priority ranks (discrete). Rank `0` is the highest priority.
//! Deadlines are implicit, so every period update also updates the
//! deadline.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Index of a task within its [`TaskSet`].
pub type TaskId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task<T> {
    pub id: TaskId,
    pub wcet: T,
    pub period: T,
    pub deadline: T,
    pub priority: usize,
}

impl<T: Scalar> Task<T> {
    /// Task with an implicit deadline.
    pub fn new(id: TaskId, wcet: T, period: T, priority: usize) -> Self {
        Task {
            id,
            wcet,
            period,
            deadline: period,
            priority,
        }
    }

    pub fn utilization(&self) -> T {
        self.wcet / self.period
    }
}

/// Ordered task list. `tasks[i].id == i` once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskSet<T> {
    pub tasks: Vec<Task<T>>,
}

impl<T: Scalar> TaskSet<T> {
    pub fn new(tasks: Vec<Task<T>>) -> Self {
        TaskSet { tasks }
    }

    /// Builds a task set from `(wcet, period)` pairs; priorities follow list order.
    pub fn from_pairs(pairs: &[(T, T)]) -> Self {
        let tasks = pairs
            .iter()
            .enumerate()
            .map(|(i, &(c, p))| Task::new(i, c, p, i))
            .collect();
        TaskSet { tasks }
    }

    /// Like [`TaskSet::from_pairs`] with explicit priority ranks.
    pub fn from_pairs_with_priorities(pairs: &[(T, T)], priorities: &[usize]) -> Self {
        assert_eq!(pairs.len(), priorities.len());
        let tasks = pairs
            .iter()
            .zip(priorities)
            .enumerate()
            .map(|(i, (&(c, p), &pr))| Task::new(i, c, p, pr))
            .collect();
        TaskSet { tasks }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn periods(&self) -> Vec<T> {
        self.tasks.iter().map(|t| t.period).collect()
    }

    pub fn wcets(&self) -> Vec<T> {
        self.tasks.iter().map(|t| t.wcet).collect()
    }

    pub fn priorities(&self) -> Vec<usize> {
        self.tasks.iter().map(|t| t.priority).collect()
    }

    pub fn total_wcet(&self) -> T {
        self.tasks.iter().map(|t| t.wcet).sum()
    }

    /// Task ids ordered from highest to lowest priority.
    pub fn priority_order(&self) -> Vec<TaskId> {
        let mut order: Vec<TaskId> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.tasks[i].priority, i));
        order
    }

    /// Sets one period and its implicit deadline.
    pub fn set_period(&mut self, id: TaskId, period: T) {
        let task = &mut self.tasks[id];
        task.period = period;
        task.deadline = period;
    }

    pub fn set_priorities(&mut self, priorities: &[usize]) {
        for (task, &p) in self.tasks.iter_mut().zip(priorities) {
            task.priority = p;
        }
    }
}

/// Sum of `C_i / T_i`.
pub fn utilization<T: Scalar>(ts: &TaskSet<T>) -> T {
    ts.tasks.iter().map(Task::utilization).sum()
}

/// Whether `ranks` is a permutation of `0..ranks.len()`.
pub fn is_permutation(ranks: &[usize]) -> bool {
    let mut seen = vec![false; ranks.len()];
    for &r in ranks {
        if r >= ranks.len() || seen[r] {
            return false;
        }
        seen[r] = true;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableBounds<T> {
    pub period_min: Vec<T>,
    pub period_max: Vec<T>,
}

impl<T: Scalar> VariableBounds<T> {
    /// `period_min = C_i` and `period_max = factor * sum(C)`.
    pub fn with_cap_factor(ts: &TaskSet<T>, factor: T) -> Self {
        let cap = factor * ts.total_wcet();
        VariableBounds {
            period_min: ts.wcets(),
            period_max: vec![cap; ts.len()],
        }
    }

    /// Bounds used throughout the experiments: `[C_i, 5 * sum(C)]`.
    pub fn default_for(ts: &TaskSet<T>) -> Self {
        Self::with_cap_factor(ts, T::lit(5.0))
    }

    pub fn len(&self) -> usize {
        self.period_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.period_min.is_empty()
    }

    pub fn contains(&self, id: TaskId, period: T) -> bool {
        period >= self.period_min[id] && period <= self.period_max[id]
    }

    pub fn mean_period_max(&self) -> T {
        if self.period_max.is_empty() {
            return T::one();
        }
        self.period_max.iter().copied().sum::<T>() / T::count(self.period_max.len())
    }
}

/// Per-task control weights of the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
}

impl<T: Scalar> ObjectiveWeights<T> {
    pub fn new(alpha: Vec<T>, beta: Vec<T>) -> Result<Self, ModelError> {
        if alpha.len() != beta.len() {
            return Err(ModelError::LengthMismatch {
                what: "beta",
                expected: alpha.len(),
                found: beta.len(),
            });
        }
        if let Some(i) = alpha.iter().position(|a| !(*a > T::zero())) {
            return Err(ModelError::NonPositiveWeight { what: "alpha", id: i });
        }
        if let Some(i) = beta.iter().position(|b| !(*b > T::zero())) {
            return Err(ModelError::NonPositiveWeight { what: "beta", id: i });
        }
        Ok(ObjectiveWeights { alpha, beta })
    }

    /// Unit weights for `n` tasks.
    pub fn uniform(n: usize, alpha: T, beta: T) -> Self {
        ObjectiveWeights {
            alpha: vec![alpha; n],
            beta: vec![beta; n],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{what} has length {found}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("period {period} of task {id} outside bounds [{min}, {max}]")]
    PeriodOutOfBounds {
        id: TaskId,
        period: f64,
        min: f64,
        max: f64,
    },
    #[error("priorities are not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("{what} weight of task {id} must be positive")]
    NonPositiveWeight { what: &'static str, id: TaskId },
    #[error("invalid task set: {0}")]
    Invalid(String),
}

/// One broken invariant found by [`validate_taskset`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    IdMismatch { position: usize, id: TaskId },
    NonPositiveWcet(TaskId),
    PeriodBelowWcet(TaskId),
    NonPositiveDeadline(TaskId),
    DeadlineNotImplicit(TaskId),
    PrioritiesNotPermutation,
    BoundsLength { expected: usize, found: usize },
    BoundsInverted(TaskId),
    MinBelowWcet(TaskId),
    PeriodBelowMin(TaskId),
    PeriodAboveMax(TaskId),
}

impl Violation {
    pub fn task(&self) -> Option<TaskId> {
        use Violation::*;
        match *self {
            IdMismatch { position, .. } => Some(position),
            NonPositiveWcet(id) | PeriodBelowWcet(id) | NonPositiveDeadline(id)
            | DeadlineNotImplicit(id) | BoundsInverted(id) | MinBelowWcet(id)
            | PeriodBelowMin(id) | PeriodAboveMax(id) => Some(id),
            PrioritiesNotPermutation | BoundsLength { .. } => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            IdMismatch { position, id } => write!(f, "task at position {position} has id {id}"),
            NonPositiveWcet(id) => write!(f, "wcet <= 0 for task {id}"),
            PeriodBelowWcet(id) => write!(f, "period < wcet for task {id}"),
            NonPositiveDeadline(id) => write!(f, "deadline <= 0 for task {id}"),
            DeadlineNotImplicit(id) => write!(f, "deadline != period for task {id}"),
            PrioritiesNotPermutation => write!(f, "priorities not a permutation"),
            BoundsLength { expected, found } => {
                write!(f, "bounds have length {found}, expected {expected}")
            }
            BoundsInverted(id) => write!(f, "period_min > period_max for task {id}"),
            MinBelowWcet(id) => write!(f, "period_min < wcet for task {id}"),
            PeriodBelowMin(id) => write!(f, "period below period_min for task {id}"),
            PeriodAboveMax(id) => write!(f, "period above period_max for task {id}"),
        }
    }
}

/// Checks every task, task-set and bound invariant. An empty list means valid.
pub fn validate_taskset<T: Scalar>(ts: &TaskSet<T>, bounds: &VariableBounds<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    for (pos, t) in ts.tasks.iter().enumerate() {
        if t.id != pos {
            out.push(Violation::IdMismatch { position: pos, id: t.id });
        }
        if !(t.wcet > T::zero()) {
            out.push(Violation::NonPositiveWcet(pos));
        }
        if !(t.period >= t.wcet) {
            out.push(Violation::PeriodBelowWcet(pos));
        }
        if !(t.deadline > T::zero()) {
            out.push(Violation::NonPositiveDeadline(pos));
        }
        if t.deadline != t.period {
            out.push(Violation::DeadlineNotImplicit(pos));
        }
    }
    if !is_permutation(&ts.priorities()) {
        out.push(Violation::PrioritiesNotPermutation);
    }
    let n = ts.len();
    if bounds.period_min.len() != n || bounds.period_max.len() != n {
        out.push(Violation::BoundsLength {
            expected: n,
            found: bounds.period_min.len().min(bounds.period_max.len()),
        });
        return out;
    }
    for (i, t) in ts.tasks.iter().enumerate() {
        let (lo, hi) = (bounds.period_min[i], bounds.period_max[i]);
        if !(lo <= hi) {
            out.push(Violation::BoundsInverted(i));
        }
        if !(lo >= t.wcet) {
            out.push(Violation::MinBelowWcet(i));
        }
        if t.period < lo {
            out.push(Violation::PeriodBelowMin(i));
        }
        if t.period > hi {
            out.push(Violation::PeriodAboveMax(i));
        }
    }
    out
}

/// Returns a copy of `ts` carrying the given periods (and implicit deadlines) and priorities.
pub fn apply_assignment<T: Scalar>(
    ts: &TaskSet<T>,
    bounds: &VariableBounds<T>,
    periods: &[T],
    priorities: &[usize],
) -> Result<TaskSet<T>, ModelError> {
    let n = ts.len();
    for (what, len) in [
        ("periods", periods.len()),
        ("priorities", priorities.len()),
        ("period bounds", bounds.len()),
    ] {
        if len != n {
            return Err(ModelError::LengthMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    for (i, &p) in periods.iter().enumerate() {
        if !bounds.contains(i, p) {
            return Err(ModelError::PeriodOutOfBounds {
                id: i,
                period: p.to_f64().unwrap_or(f64::NAN),
                min: bounds.period_min[i].to_f64().unwrap_or(f64::NAN),
                max: bounds.period_max[i].to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    if !is_permutation(priorities) {
        return Err(ModelError::NotAPermutation(n));
    }
    let mut out = ts.clone();
    for (i, &p) in periods.iter().enumerate() {
        out.set_period(i, p);
    }
    out.set_priorities(priorities);
    Ok(out)
}

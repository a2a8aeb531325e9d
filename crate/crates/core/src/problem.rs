//! Problem instance and optimizer iterate.

use std::collections::BTreeSet;

use crate::analysis::SchedOracle;
use crate::model::{ObjectiveWeights, TaskId, TaskSet, VariableBounds};
use crate::objective::{ObjectiveError, ObjectiveFn};
use crate::scalar::Scalar;

/// An optimization instance: the task set (WCETs plus a starting point),
/// objective weights, period bounds, the black-box constraint and the
/// objective.
#[derive(Clone, Copy)]
pub struct Problem<'a, T: Scalar> {
    pub taskset: &'a TaskSet<T>,
    pub weights: &'a ObjectiveWeights<T>,
    pub bounds: &'a VariableBounds<T>,
    pub oracle: &'a dyn SchedOracle<T>,
    pub objective: &'a dyn ObjectiveFn<T>,
}

impl<'a, T: Scalar> Problem<'a, T> {
    /// `F(ts)`, failing with [`ObjectiveError::Infeasible`] when `Sched(ts) != 0`.
    pub fn evaluate(&self, ts: &TaskSet<T>) -> Result<T, ObjectiveError<T>> {
        self.objective.evaluate(ts, self.weights, self.oracle)
    }

    pub fn is_schedulable(&self, ts: &TaskSet<T>) -> bool {
        self.oracle.query(ts).schedulable
    }

    /// Same instance, different oracle.
    pub fn with_oracle<'b>(&self, oracle: &'b dyn SchedOracle<T>) -> Problem<'b, T>
    where
        'a: 'b,
    {
        Problem {
            taskset: self.taskset,
            weights: self.weights,
            bounds: self.bounds,
            oracle,
            objective: self.objective,
        }
    }
}

/// Current iterate of the optimizer. The task set is always schedulable.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState<T> {
    pub taskset: TaskSet<T>,
    pub frozen: BTreeSet<TaskId>,
    pub objective_value: T,
    pub outer_iter: usize,
    pub inner_iter: usize,
}

impl<T: Scalar> OptState<T> {
    /// Evaluates `ts` and wraps it as a fresh state with nothing frozen.
    pub fn new(problem: &Problem<'_, T>, ts: TaskSet<T>) -> Result<Self, ObjectiveError<T>> {
        let objective_value = problem.evaluate(&ts)?;
        Ok(OptState {
            taskset: ts,
            frozen: BTreeSet::new(),
            objective_value,
            outer_iter: 0,
            inner_iter: 0,
        })
    }

    /// Ids of period variables still being optimized, ascending.
    pub fn free_ids(&self) -> Vec<TaskId> {
        (0..self.taskset.len())
            .filter(|i| !self.frozen.contains(i))
            .collect()
    }

    pub fn all_frozen(&self) -> bool {
        self.frozen.len() >= self.taskset.len()
    }

    /// Task set with the periods at `ids` replaced by `values`, clamped to bounds.
    pub fn with_periods(&self, bounds: &VariableBounds<T>, ids: &[TaskId], values: &[T]) -> TaskSet<T> {
        let mut ts = self.taskset.clone();
        for (&i, &v) in ids.iter().zip(values) {
            ts.set_period(i, v.max(bounds.period_min[i]).min(bounds.period_max[i]));
        }
        ts
    }

    /// Task set moved by a full-length step `delta` (one entry per task), clamped to bounds.
    pub fn stepped(&self, bounds: &VariableBounds<T>, delta: &[T]) -> TaskSet<T> {
        let mut ts = self.taskset.clone();
        for (i, &d) in delta.iter().enumerate() {
            if d != T::zero() {
                let p = ts.tasks[i].period + d;
                ts.set_period(i, p.max(bounds.period_min[i]).min(bounds.period_max[i]));
            }
        }
        ts
    }
}

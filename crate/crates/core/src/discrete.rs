//! Priority assignment heuristics for the discrete variable block.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::SchedOracle;
use crate::model::{ObjectiveWeights, TaskSet};
use crate::objective::{control_objective, ObjectiveError};
use crate::scalar::Scalar;

/// Largest task count accepted by [`brute_force_priorities`].
pub const BRUTE_FORCE_MAX_TASKS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorityPolicy {
    RateMonotonic,
    /// Ascending `D_i - k * C_i`.
    Dkc { k: f64 },
    BruteForce,
}

impl PriorityPolicy {
    /// Priority ranks for `ts`. Brute force keeps the current ranks when no
    /// order is schedulable.
    pub fn assign<T: Scalar>(
        &self,
        ts: &TaskSet<T>,
        weights: &ObjectiveWeights<T>,
        oracle: &dyn SchedOracle<T>,
    ) -> Result<Vec<usize>, DiscreteError> {
        match *self {
            PriorityPolicy::RateMonotonic => Ok(assign_rm(ts)),
            PriorityPolicy::Dkc { k } => Ok(assign_dkc(ts, T::lit(k))),
            PriorityPolicy::BruteForce => Ok(brute_force_priorities(ts, weights, oracle)?
                .map(|(ranks, _)| ranks)
                .unwrap_or_else(|| ts.priorities())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            PriorityPolicy::RateMonotonic => "rm".into(),
            PriorityPolicy::Dkc { k } => format!("dkc(k={k})"),
            PriorityPolicy::BruteForce => "brute_force".into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscreteError {
    #[error("brute force supports at most {BRUTE_FORCE_MAX_TASKS} tasks, got {0}")]
    TooManyTasks(usize),
    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

/// Ranks from ascending keys; equal keys keep id order.
fn ranks_by_key<T: Scalar>(keys: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0; keys.len()];
    for (rank, &id) in order.iter().enumerate() {
        ranks[id] = rank;
    }
    ranks
}

/// Rate monotonic: shorter period, higher priority.
pub fn assign_rm<T: Scalar>(ts: &TaskSet<T>) -> Vec<usize> {
    ranks_by_key(&ts.periods())
}

/// Ascending `D_i - k * C_i`. `k = 0` is deadline monotonic.
pub fn assign_dkc<T: Scalar>(ts: &TaskSet<T>, k: T) -> Vec<usize> {
    let keys: Vec<T> = ts.tasks.iter().map(|t| t.deadline - k * t.wcet).collect();
    ranks_by_key(&keys)
}

/// Advances `perm` to the next lexicographic permutation; false after the last.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Exhaustive search over all `N!` rank vectors for the schedulable one
/// with the lowest control objective. Ties go to the lexicographically
/// first rank vector. `None` if no order is schedulable.
pub fn brute_force_priorities<T: Scalar>(
    ts: &TaskSet<T>,
    weights: &ObjectiveWeights<T>,
    oracle: &dyn SchedOracle<T>,
) -> Result<Option<(Vec<usize>, T)>, DiscreteError> {
    let n = ts.len();
    if n > BRUTE_FORCE_MAX_TASKS {
        return Err(DiscreteError::TooManyTasks(n));
    }
    let mut ranks: Vec<usize> = (0..n).collect();
    let mut candidate = ts.clone();
    let mut best: Option<(Vec<usize>, T)> = None;
    loop {
        candidate.set_priorities(&ranks);
        match control_objective(&candidate, weights, oracle) {
            Ok(f) => {
                if best.as_ref().is_none_or(|(_, b)| f < *b) {
                    best = Some((ranks.clone(), f));
                }
            }
            Err(ObjectiveError::Infeasible(_)) => {}
            Err(e) => return Err(DiscreteError::Objective(e.to_string())),
        }
        if !next_permutation(&mut ranks) {
            break;
        }
    }
    Ok(best)
}

//! Variable elimination after a continuous round stalls at the
//! schedulability boundary.
//!
//! First look for a feasible descent direction inside the span of the last
//! infeasible step by zeroing some of its coordinates. Failing that,
//! freeze the periods of the tasks that missed their deadline so the next
//! round optimizes only the rest.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::TaskId;
use crate::nmbo::{strictly_better, Trial};
use crate::objective::ObjectiveError;
use crate::problem::{OptState, Problem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeKind {
    FoundDirection,
    Eliminated,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VeOutcome<T> {
    pub kind: VeKind,
    /// Full-length step, one entry per task.
    pub direction: Option<Vec<T>>,
    pub newly_frozen: BTreeSet<TaskId>,
    pub oracle_calls: usize,
}

impl<T> VeOutcome<T> {
    fn exhausted(oracle_calls: usize) -> Self {
        VeOutcome {
            kind: VeKind::Exhausted,
            direction: None,
            newly_frozen: BTreeSet::new(),
            oracle_calls,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VeError {
    #[error("elimination exhausted; nothing to reformulate")]
    Exhausted,
    #[error("direction leads to an unschedulable point")]
    InfeasibleDirection,
    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

/// Default oracle-call budget for one subspace search.
pub fn default_budget(n_tasks: usize) -> usize {
    2 * n_tasks
}

fn zeroed<T: Scalar>(delta: &[T], ids: impl IntoIterator<Item = TaskId>) -> Vec<T> {
    let mut out = delta.to_vec();
    for i in ids {
        out[i] = T::zero();
    }
    out
}

/// Tries sub-directions of `last.delta` at full length: each single
/// coordinate zeroed, then the deadline-missing coordinates zeroed
/// together. Returns the first one that is schedulable and strictly
/// decreases the objective.
pub fn subspace_search<T: Scalar>(
    state: &OptState<T>,
    last: &Trial<T>,
    problem: &Problem<'_, T>,
    budget: usize,
) -> VeOutcome<T> {
    let free = state.free_ids();
    // Frozen entries never move.
    let delta = zeroed(&last.delta, state.frozen.iter().copied());
    if delta.iter().all(|&d| d == T::zero()) {
        return VeOutcome::exhausted(0);
    }

    let mut candidates: Vec<Vec<T>> = free
        .iter()
        .filter(|&&k| delta[k] != T::zero())
        .map(|&k| zeroed(&delta, [k]))
        .collect();
    if let Some(miss) = &last.verdict.miss_set {
        candidates.push(zeroed(&delta, miss.iter().copied()));
    }

    let mut tried: Vec<Vec<T>> = Vec::new();
    let mut calls = 0;
    for cand in candidates {
        if calls >= budget {
            break;
        }
        if cand.iter().all(|&d| d == T::zero()) || tried.contains(&cand) {
            continue;
        }
        calls += 1;
        let ts = state.stepped(problem.bounds, &cand);
        if let Ok(f) = problem.evaluate(&ts) {
            if strictly_better(f, state.objective_value) {
                return VeOutcome {
                    kind: VeKind::FoundDirection,
                    direction: Some(cand),
                    newly_frozen: BTreeSet::new(),
                    oracle_calls: calls,
                };
            }
        }
        tried.push(cand);
    }
    VeOutcome::exhausted(calls)
}

/// Freezes the free periods blamed for the infeasible trial.
///
/// With a detailed verdict the blame is its miss set. With a boolean-only
/// verdict each free coordinate of the step is probed alone and those
/// whose solo step is unschedulable are blamed; if none is, the coordinate
/// with the largest step is frozen.
pub fn eliminate_missing<T: Scalar>(
    state: &OptState<T>,
    trial: &Trial<T>,
    problem: &Problem<'_, T>,
) -> VeOutcome<T> {
    let free: BTreeSet<TaskId> = state.free_ids().into_iter().collect();
    if let Some(miss) = &trial.verdict.miss_set {
        let newly: BTreeSet<TaskId> = miss.intersection(&free).copied().collect();
        if newly.is_empty() {
            return VeOutcome::exhausted(0);
        }
        return VeOutcome {
            kind: VeKind::Eliminated,
            direction: None,
            newly_frozen: newly,
            oracle_calls: 0,
        };
    }

    let moving: Vec<TaskId> = free
        .iter()
        .copied()
        .filter(|&k| trial.delta[k] != T::zero())
        .collect();
    if moving.is_empty() {
        return VeOutcome::exhausted(0);
    }
    let n = state.taskset.len();
    let mut calls = 0;
    let mut newly = BTreeSet::new();
    for &k in &moving {
        let mut solo = vec![T::zero(); n];
        solo[k] = trial.delta[k];
        calls += 1;
        if !problem.is_schedulable(&state.stepped(problem.bounds, &solo)) {
            newly.insert(k);
        }
    }
    if newly.is_empty() {
        let mut largest = moving[0];
        for &k in &moving[1..] {
            if trial.delta[k].abs() > trial.delta[largest].abs() {
                largest = k;
            }
        }
        newly.insert(largest);
    }
    VeOutcome {
        kind: VeKind::Eliminated,
        direction: None,
        newly_frozen: newly,
        oracle_calls: calls,
    }
}

/// New starting state for the next continuous round.
pub fn reformulate<T: Scalar>(
    state: &OptState<T>,
    outcome: &VeOutcome<T>,
    problem: &Problem<'_, T>,
) -> Result<OptState<T>, VeError> {
    match outcome.kind {
        VeKind::Exhausted => Err(VeError::Exhausted),
        VeKind::Eliminated => {
            let mut next = state.clone();
            next.frozen.extend(outcome.newly_frozen.iter().copied());
            Ok(next)
        }
        VeKind::FoundDirection => {
            let direction = outcome.direction.as_ref().ok_or(VeError::Exhausted)?;
            let direction = zeroed(direction, state.frozen.iter().copied());
            let ts = state.stepped(problem.bounds, &direction);
            let objective_value = match problem.evaluate(&ts) {
                Ok(f) => f,
                Err(ObjectiveError::Infeasible(_)) => return Err(VeError::InfeasibleDirection),
                Err(e) => return Err(VeError::Objective(e.to_string())),
            };
            Ok(OptState {
                taskset: ts,
                objective_value,
                ..state.clone()
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, as_boolean_blackbox, AnalysisVerdict, ResponseTimeAnalysis};
    use crate::model::{ObjectiveWeights, TaskSet, VariableBounds};
    use crate::objective::ControlObjective;

    // C = (1, 1, 4), T = (10, 10, 7): shrinking T_2 below r_2 = 6 is the
    // only thing that breaks schedulability.
    fn instance() -> (TaskSet<f64>, ObjectiveWeights<f64>, VariableBounds<f64>) {
        let ts = TaskSet::from_pairs(&[(1.0, 10.0), (1.0, 10.0), (4.0, 7.0)]);
        let w = ObjectiveWeights::uniform(3, 1.0, 1.0);
        let b = VariableBounds::default_for(&ts);
        (ts, w, b)
    }

    fn trial(ts: &TaskSet<f64>, delta: Vec<f64>) -> Trial<f64> {
        let mut moved = ts.clone();
        for (i, d) in delta.iter().enumerate() {
            moved.set_period(i, moved.tasks[i].period + d);
        }
        Trial {
            verdict: analyze(&moved),
            delta,
        }
    }

    #[test]
    fn instance_points_checked_by_rta() {
        let (ts, ..) = instance();
        assert!(analyze(&ts).schedulable);
        let full = TaskSet::from_pairs(&[(1.0, 8.0), (1.0, 8.0), (4.0, 5.0)]);
        assert_eq!(analyze(&full).miss_set.unwrap(), BTreeSet::from([2]));
        let sub = TaskSet::from_pairs(&[(1.0, 8.0), (1.0, 8.0), (4.0, 7.0)]);
        assert_eq!(analyze(&sub).response_times.unwrap(), vec![1.0, 2.0, 6.0]);
        for (a, b, c) in [(10.0, 8.0, 5.0), (8.0, 10.0, 5.0), (10.0, 10.0, 5.0)] {
            assert!(!analyze(&TaskSet::from_pairs(&[(1.0, a), (1.0, b), (4.0, c)])).schedulable);
        }
    }

    #[test]
    fn subspace_search_finds_feasible_subdirection() {
        let (ts, w, b) = instance();
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &b,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        };
        let state = OptState::new(&problem, ts.clone()).unwrap();
        let last = trial(&ts, vec![-2.0, -2.0, -2.0]);
        assert!(!last.verdict.schedulable);
        let out = subspace_search(&state, &last, &problem, default_budget(3));
        assert_eq!(out.kind, VeKind::FoundDirection);
        let dir = out.direction.clone().unwrap();
        assert_eq!(dir, vec![-2.0, -2.0, 0.0]);
        assert!(analyze(&state.stepped(&b, &dir)).schedulable);
        assert_eq!(out.oracle_calls, 3);

        let next = reformulate(&state, &out, &problem).unwrap();
        assert_eq!(next.taskset.periods(), vec![8.0, 8.0, 7.0]);
        assert!(next.objective_value < state.objective_value);
    }

    #[test]
    fn subspace_search_degenerate_inputs() {
        let (ts, w, b) = instance();
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &b,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        };
        let state = OptState::new(&problem, ts.clone()).unwrap();
        let zero = trial(&ts, vec![0.0; 3]);
        assert_eq!(subspace_search(&state, &zero, &problem, 6).kind, VeKind::Exhausted);
        let last = trial(&ts, vec![-2.0, -2.0, -2.0]);
        let out = subspace_search(&state, &last, &problem, 0);
        assert_eq!(out.kind, VeKind::Exhausted);
        assert_eq!(out.oracle_calls, 0);
    }

    #[test]
    fn eliminate_with_detailed_verdict() {
        let (ts, w, b) = instance();
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &b,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        };
        let state = OptState::new(&problem, ts.clone()).unwrap();
        let t = trial(&ts, vec![-2.0, -2.0, -2.0]);
        let out = eliminate_missing(&state, &t, &problem);
        assert_eq!(out.kind, VeKind::Eliminated);
        assert_eq!(out.newly_frozen, BTreeSet::from([2]));

        let next = reformulate(&state, &out, &problem).unwrap();
        assert_eq!(next.taskset, state.taskset);
        assert_eq!(next.frozen, BTreeSet::from([2]));

        let out = eliminate_missing(&next, &t, &problem);
        assert_eq!(out.kind, VeKind::Exhausted);
        assert!(out.newly_frozen.is_empty());
        assert_eq!(reformulate(&next, &out, &problem), Err(VeError::Exhausted));
    }

    #[test]
    fn eliminate_with_boolean_verdict_probes_each_coordinate() {
        let (ts, w, b) = instance();
        let bb = as_boolean_blackbox(ResponseTimeAnalysis);
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &b,
            oracle: &bb,
            objective: &crate::objective::WeightedPeriods,
        };
        let state = OptState::new(&problem, ts.clone()).unwrap();
        let t = Trial {
            delta: vec![-2.0, -2.0, -2.0],
            verdict: AnalysisVerdict::boolean(false),
        };
        let out = eliminate_missing(&state, &t, &problem);
        assert_eq!(out.kind, VeKind::Eliminated);
        assert_eq!(out.newly_frozen, BTreeSet::from([2]));
        assert_eq!(out.oracle_calls, 3);
    }

    #[test]
    fn boolean_blame_falls_back_to_largest_step() {
        // Each solo step stays schedulable; only the joint step fails.
        let ts = TaskSet::from_pairs(&[(2.0, 10.0), (2.0, 10.0)]);
        let w = ObjectiveWeights::uniform(2, 1.0, 1.0);
        let b = VariableBounds::default_for(&ts);
        let bb = as_boolean_blackbox(ResponseTimeAnalysis);
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &b,
            oracle: &bb,
            objective: &crate::objective::WeightedPeriods,
        };
        let state = OptState::new(&problem, ts.clone()).unwrap();
        let t = Trial {
            delta: vec![-6.5, -5.0],
            verdict: AnalysisVerdict::boolean(false),
        };
        assert!(!analyze(&TaskSet::from_pairs(&[(2.0, 3.5), (2.0, 5.0)])).schedulable);
        assert!(analyze(&TaskSet::from_pairs(&[(2.0, 3.5), (2.0, 10.0)])).schedulable);
        assert!(analyze(&TaskSet::from_pairs(&[(2.0, 10.0), (2.0, 5.0)])).schedulable);
        let out = eliminate_missing(&state, &t, &problem);
        assert_eq!(out.newly_frozen, BTreeSet::from([0]));
    }

    #[test]
    fn freezing_everything_leaves_nothing_free() {
        let (ts, w, b) = instance();
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &b,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        };
        let mut state = OptState::new(&problem, ts.clone()).unwrap();
        let out = VeOutcome {
            kind: VeKind::Eliminated,
            direction: None,
            newly_frozen: BTreeSet::from([0, 1, 2]),
            oracle_calls: 0,
        };
        state = reformulate(&state, &out, &problem).unwrap();
        assert!(state.all_frozen());
        assert!(state.free_ids().is_empty());
        let cfg = crate::nmbo::NmboConfig::scaled(&b);
        let run = crate::nmbo::nmbo_run(state.clone(), &problem, &cfg).unwrap();
        assert_eq!(run.state.taskset, state.taskset);
        assert_eq!(run.accepted_steps, 0);
    }
}

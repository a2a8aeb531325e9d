//! The outer coordinate-descent loop.
//!
//! Each outer iteration optionally re-derives priorities with a policy at
//! the current periods (periods held constant), then runs one continuous
//! round with priorities held constant, followed by variable elimination.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::CountingOracle;
use crate::discrete::{assign_rm, PriorityPolicy};
use crate::elimination::{default_budget, eliminate_missing, reformulate, subspace_search, VeKind};
use crate::model::{validate_taskset, TaskSet};
use crate::nmbo::{nmbo_run_observed, strictly_better, NmboConfig, NmboError};
use crate::problem::{OptState, Problem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Continuous optimization only; priorities stay at their initial values.
    North,
    /// Continuous optimization alternated with a priority policy.
    NorthPlus { policy: PriorityPolicy },
}

impl Method {
    pub fn north_plus_rm() -> Self {
        Method::NorthPlus {
            policy: PriorityPolicy::RateMonotonic,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Method::North => "north".into(),
            Method::NorthPlus { policy } => format!("north+{}", policy.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig<T> {
    /// `None` derives defaults from the instance's bounds.
    pub nmbo: Option<NmboConfig<T>>,
    pub max_outer: usize,
    pub outer_rel_tol: T,
    pub seed: u64,
    pub method: Method,
}

impl<T: Scalar> RunConfig<T> {
    pub fn new(method: Method) -> Self {
        RunConfig {
            nmbo: None,
            max_outer: 50,
            outer_rel_tol: T::lit(1e-3),
            seed: 0,
            method,
        }
    }

    pub fn with_method(&self, method: Method) -> Self {
        RunConfig {
            method,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<(), RunError> {
        if self.max_outer == 0 || !(self.outer_rel_tol > T::zero()) {
            return Err(RunError::BadConfig);
        }
        if let Some(n) = &self.nmbo {
            n.validate().map_err(|_| RunError::BadConfig)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxOuter,
    InitialInfeasible,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxOuter => "max_outer",
            Status::InitialInfeasible => "initial_infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord<T> {
    pub iter: usize,
    pub objective: T,
    pub frozen: usize,
    pub priorities: Vec<usize>,
    pub oracle_calls: u64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub taskset: TaskSet<T>,
    /// NaN when the initial point is infeasible.
    pub objective: T,
    pub status: Status,
    pub trace: Vec<TraceRecord<T>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("invalid run configuration")]
    BadConfig,
    #[error(transparent)]
    Nmbo(#[from] NmboError),
    #[error("priority policy failed: {0}")]
    Policy(String),
    #[error("elimination failed: {0}")]
    Elimination(String),
}

/// Starting point: every period at its upper bound, rate-monotonic ranks.
/// `None` when that point violates the bounds or is unschedulable.
pub fn initial_solution<T: Scalar>(problem: &Problem<'_, T>) -> Option<OptState<T>> {
    let mut ts = problem.taskset.clone();
    for (i, &p) in problem.bounds.period_max.iter().enumerate().take(ts.len()) {
        ts.set_period(i, p);
    }
    let ranks = assign_rm(&ts);
    ts.set_priorities(&ranks);
    if !validate_taskset(&ts, problem.bounds).is_empty() {
        return None;
    }
    OptState::new(problem, ts).ok()
}

pub fn optimize<T: Scalar>(problem: &Problem<'_, T>, cfg: &RunConfig<T>) -> Result<Solution<T>, RunError> {
    optimize_observed(problem, cfg, &mut |_: &OptState<T>| {})
}

/// Plain continuous optimization with the initial priorities frozen.
pub fn run_north_baseline<T: Scalar>(
    problem: &Problem<'_, T>,
    cfg: &RunConfig<T>,
) -> Result<Solution<T>, RunError> {
    optimize(problem, &cfg.with_method(Method::North))
}

/// [`optimize`], calling `observer` on every accepted iterate.
pub fn optimize_observed<T: Scalar>(
    problem: &Problem<'_, T>,
    cfg: &RunConfig<T>,
    observer: &mut dyn FnMut(&OptState<T>),
) -> Result<Solution<T>, RunError> {
    match initial_solution(problem) {
        Some(state) => optimize_from(problem, state, cfg, observer),
        None => {
            cfg.validate()?;
            let mut ts = problem.taskset.clone();
            for (i, &p) in problem.bounds.period_max.iter().enumerate().take(ts.len()) {
                ts.set_period(i, p);
            }
            Ok(Solution {
                taskset: ts,
                objective: T::nan(),
                status: Status::InitialInfeasible,
                trace: Vec::new(),
            })
        }
    }
}

/// Runs the outer loop from an explicit feasible starting state.
pub fn optimize_from<T: Scalar>(
    problem: &Problem<'_, T>,
    mut state: OptState<T>,
    cfg: &RunConfig<T>,
    observer: &mut dyn FnMut(&OptState<T>),
) -> Result<Solution<T>, RunError> {
    cfg.validate()?;
    let counter = CountingOracle::new(problem.oracle);
    let problem = problem.with_oracle(&counter);
    state.objective_value = match problem.evaluate(&state.taskset) {
        Ok(f) => f,
        Err(_) => {
            return Ok(Solution {
                objective: T::nan(),
                taskset: state.taskset,
                status: Status::InitialInfeasible,
                trace: Vec::new(),
            })
        }
    };
    let nmbo_cfg = cfg
        .nmbo
        .clone()
        .unwrap_or_else(|| NmboConfig::scaled(problem.bounds));
    let budget = default_budget(state.taskset.len());

    let mut trace = Vec::new();
    let mut status = Status::MaxOuter;
    let mut continuous_done = false;
    for outer in 1..=cfg.max_outer {
        let started = Instant::now();
        state.outer_iter = outer;
        let f_before = state.objective_value;

        let mut priorities_changed = false;
        let mut pending = None;
        if let Method::NorthPlus { policy } = cfg.method {
            let ranks = policy
                .assign(&state.taskset, problem.weights, &counter)
                .map_err(|e| RunError::Policy(e.to_string()))?;
            if ranks != state.taskset.priorities() {
                let mut candidate = state.clone();
                candidate.taskset.set_priorities(&ranks);
                if let Ok(f) = problem.evaluate(&candidate.taskset) {
                    candidate.objective_value = f;
                    if f <= state.objective_value {
                        state = candidate;
                        priorities_changed = true;
                        observer(&state);
                    } else {
                        // A reorder usually costs F at the old periods and pays
                        // off once they move, so judge it after re-optimizing.
                        let mut seen = Vec::new();
                        let trial = nmbo_run_observed(candidate, &problem, &nmbo_cfg, &mut |s| {
                            seen.push(s.clone())
                        })?;
                        if trial.state.objective_value <= state.objective_value {
                            for s in &seen {
                                observer(s);
                            }
                            priorities_changed = true;
                            pending = Some(trial);
                        }
                    }
                }
            }
        }
        if continuous_done && !priorities_changed {
            status = Status::Converged;
            break;
        }

        let run = match pending {
            Some(run) => run,
            None => nmbo_run_observed(state, &problem, &nmbo_cfg, observer)?,
        };
        state = run.state;

        let mut eliminated = false;
        let mut exhausted = true;
        if let Some(trial) = &run.last_infeasible {
            let mut outcome = subspace_search(&state, trial, &problem, budget);
            if outcome.kind == VeKind::Exhausted {
                outcome = eliminate_missing(&state, trial, &problem);
            }
            if outcome.kind != VeKind::Exhausted {
                exhausted = false;
                eliminated = outcome.kind == VeKind::Eliminated;
                state = reformulate(&state, &outcome, &problem)
                    .map_err(|e| RunError::Elimination(e.to_string()))?;
                if outcome.kind == VeKind::FoundDirection {
                    observer(&state);
                }
            }
        }

        trace.push(TraceRecord {
            iter: outer,
            objective: state.objective_value,
            frozen: state.frozen.len(),
            priorities: state.taskset.priorities(),
            oracle_calls: counter.calls(),
            ms: started.elapsed().as_secs_f64() * 1e3,
        });

        if state.all_frozen() {
            status = Status::Converged;
            break;
        }
        let small_gain = !strictly_better(
            state.objective_value,
            f_before - cfg.outer_rel_tol * f_before.abs(),
        );
        continuous_done = exhausted || (small_gain && !eliminated);
        if continuous_done && cfg.method == Method::North {
            status = Status::Converged;
            break;
        }
    }

    Ok(Solution {
        objective: state.objective_value,
        taskset: state.taskset,
        status,
        trace,
    })
}

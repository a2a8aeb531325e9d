//! Feasibility-preserving continuous descent over the free periods.
//!
//! Each iteration estimates the gradient by finite differences, proposes a
//! steepest-descent step clipped to a trust radius and the period bounds,
//! and backtracks along it until the trial point is schedulable and
//! strictly cheaper. Priorities and frozen periods are held constant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::AnalysisVerdict;
use crate::model::{TaskId, TaskSet, VariableBounds};
use crate::objective::ObjectiveError;
use crate::problem::{OptState, Problem};
use crate::scalar::{norm2, Scalar};

/// Below this gradient norm a point is treated as stationary.
const STATIONARY_NORM: f64 = 1e-12;

/// How the descent direction is estimated from objective probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientScheme {
    /// [`numeric_gradient`].
    Central,
    /// [`descent_slopes`].
    OneSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmboConfig<T> {
    /// Stop once an accepted step is shorter than this (Euclidean norm).
    pub step_threshold: T,
    pub fd_step: T,
    pub backtrack_factor: T,
    pub max_backtracks: usize,
    pub initial_trust_radius: T,
    pub max_iterations: usize,
    pub gradient: GradientScheme,
}

impl<T: Scalar> NmboConfig<T> {
    /// Defaults scaled by the mean upper period bound.
    pub fn scaled(bounds: &VariableBounds<T>) -> Self {
        let scale = bounds.mean_period_max();
        NmboConfig {
            step_threshold: T::lit(1e-2) * scale,
            fd_step: T::lit(1e-3) * scale,
            backtrack_factor: T::lit(0.5),
            max_backtracks: 30,
            initial_trust_radius: T::lit(0.1) * scale,
            max_iterations: 500,
            gradient: GradientScheme::OneSided,
        }
    }

    pub fn validate(&self) -> Result<(), NmboError> {
        let positive = self.step_threshold > T::zero()
            && self.fd_step > T::zero()
            && self.initial_trust_radius > T::zero()
            && self.max_iterations > 0;
        let factor_ok = self.backtrack_factor > T::zero() && self.backtrack_factor < T::one();
        if positive && factor_ok {
            Ok(())
        } else {
            Err(NmboError::BadConfig)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NmboError {
    #[error("initial state is not schedulable")]
    InitialInfeasible,
    #[error("invalid optimizer configuration")]
    BadConfig,
    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

impl<T: Scalar> From<ObjectiveError<T>> for NmboError {
    fn from(e: ObjectiveError<T>) -> Self {
        match e {
            ObjectiveError::Infeasible(_) => NmboError::InitialInfeasible,
            other => NmboError::Objective(other.to_string()),
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no feasible finite-difference probe for coordinate {coordinate}")]
pub struct GradientError {
    pub coordinate: usize,
}

/// Central finite differences with probes clamped to `[lower, upper]`.
///
/// A probe where `f` returns `None` (infeasible) is dropped in favour of
/// the one-sided difference toward the other side.
pub fn numeric_gradient<T, F>(
    mut f: F,
    x: &[T],
    h: T,
    lower: &[T],
    upper: &[T],
) -> Result<Vec<T>, GradientError>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<T>,
{
    let mut probe = x.to_vec();
    let mut fx: Option<Option<T>> = None;
    let mut grad = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let up = (x[k] + h).min(upper[k]);
        let dn = (x[k] - h).max(lower[k]);
        let mut eval_at = |v: T| {
            probe[k] = v;
            let out = f(&probe);
            probe[k] = x[k];
            out
        };
        let fu = if up > x[k] { eval_at(up) } else { None };
        let fd = if dn < x[k] { eval_at(dn) } else { None };
        let g = match (fu, fd) {
            (Some(a), Some(b)) => (a - b) / (up - dn),
            (a, b) => {
                if up <= x[k] && dn >= x[k] {
                    grad.push(T::zero());
                    continue;
                }
                let center = *fx.get_or_insert_with(|| f(x));
                match (a, b, center) {
                    (Some(a), None, Some(c)) => (a - c) / (up - x[k]),
                    (None, Some(b), Some(c)) => (c - b) / (x[k] - dn),
                    _ => return Err(GradientError { coordinate: k }),
                }
            }
        };
        grad.push(g);
    }
    Ok(grad)
}

/// Per-coordinate one-sided slopes, keeping only directions that help.
///
/// With `s-` the backward and `s+` the forward difference quotient, the
/// entry is `s-` when it is positive (shortening helps), else `s+` when it
/// is negative (lengthening helps), else zero. When the backward probe is
/// infeasible (`f` returns `None`), a positive `s+` stands in for it, so
/// the direction may point into the constraint and leave the step to
/// backtracking and elimination. Near a jump of a piecewise-constant term
/// this keeps the coordinate still instead of reporting a huge slope.
pub fn descent_slopes<T, F>(mut f: F, x: &[T], h: T, lower: &[T], upper: &[T]) -> Option<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<T>,
{
    let fx = f(x)?;
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let dn = (x[k] - h).max(lower[k]);
        let up = (x[k] + h).min(upper[k]);
        let mut slope = T::zero();
        let mut backward_blocked = false;
        if dn < x[k] {
            probe[k] = dn;
            match f(&probe) {
                Some(fd) => {
                    let s = (fx - fd) / (x[k] - dn);
                    if s > T::zero() {
                        slope = s;
                    }
                }
                None => backward_blocked = true,
            }
        }
        if slope == T::zero() && up > x[k] {
            probe[k] = up;
            if let Some(fu) = f(&probe) {
                let s = (fu - fx) / (up - x[k]);
                // An infeasible backward probe says nothing about the
                // objective, so the forward slope stands in for it.
                if s < T::zero() || (backward_blocked && s > T::zero()) {
                    slope = s;
                }
            }
        }
        probe[k] = x[k];
        out.push(slope);
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepProposal<T> {
    /// One entry per free period.
    pub delta: Vec<T>,
    pub predicted_decrease: T,
}

/// Steepest-descent step of length `trust_radius`, clamped to the bounds.
///
/// Components pushing a variable already at a bound further out are
/// dropped before normalizing.
pub fn propose_step<T: Scalar>(
    x: &[T],
    gradient: &[T],
    trust_radius: T,
    lower: &[T],
    upper: &[T],
) -> StepProposal<T> {
    let projected: Vec<T> = gradient
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let blocked = (g > T::zero() && x[k] <= lower[k]) || (g < T::zero() && x[k] >= upper[k]);
            if blocked || !g.is_finite() {
                T::zero()
            } else {
                g
            }
        })
        .collect();
    let gnorm = norm2(&projected);
    if !(gnorm >= T::lit(STATIONARY_NORM)) {
        return StepProposal {
            delta: vec![T::zero(); x.len()],
            predicted_decrease: T::zero(),
        };
    }
    let delta: Vec<T> = projected
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let target = x[k] - trust_radius * g / gnorm;
            target.max(lower[k]).min(upper[k]) - x[k]
        })
        .collect();
    let predicted_decrease = -gradient
        .iter()
        .zip(&delta)
        .map(|(&g, &d)| if g.is_finite() { g * d } else { T::zero() })
        .sum::<T>();
    StepProposal {
        delta,
        predicted_decrease,
    }
}

/// An infeasible trial point: the full-length step (one entry per task) and its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial<T> {
    pub delta: Vec<T>,
    pub verdict: AnalysisVerdict<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backtrack<T> {
    Accepted {
        /// One entry per free period.
        delta: Vec<T>,
        taskset: TaskSet<T>,
        objective: T,
        backtracks: usize,
        /// First infeasible trial met on the way, if any.
        infeasible: Option<Trial<T>>,
    },
    Rejected {
        infeasible: Option<Trial<T>>,
    },
}

fn expand<T: Scalar>(n: usize, free: &[TaskId], delta: &[T]) -> Vec<T> {
    let mut full = vec![T::zero(); n];
    for (&i, &d) in free.iter().zip(delta) {
        full[i] = d;
    }
    full
}

/// Whether `candidate` is a strict improvement on `current`.
pub(crate) fn strictly_better<T: Scalar>(candidate: T, current: T) -> bool {
    candidate < current - T::fixed_point_tol(current)
}

/// Shrinks `delta` by `backtrack_factor` until `x + delta` is schedulable
/// and strictly decreases the objective, or the backtrack budget runs out.
pub fn feasibility_backtrack<T: Scalar>(
    state: &OptState<T>,
    free: &[TaskId],
    delta: &[T],
    problem: &Problem<'_, T>,
    cfg: &NmboConfig<T>,
) -> Result<Backtrack<T>, NmboError> {
    let n = state.taskset.len();
    let mut infeasible = None;
    let mut scale = T::one();
    for backtracks in 0..=cfg.max_backtracks {
        let trial: Vec<T> = delta.iter().map(|&d| d * scale).collect();
        if trial.iter().all(|&d| d == T::zero()) {
            break;
        }
        let full = expand(n, free, &trial);
        let ts = state.stepped(problem.bounds, &full);
        match problem.evaluate(&ts) {
            Ok(f) if strictly_better(f, state.objective_value) => {
                return Ok(Backtrack::Accepted {
                    delta: trial,
                    taskset: ts,
                    objective: f,
                    backtracks,
                    infeasible,
                });
            }
            Ok(_) => {}
            Err(ObjectiveError::Infeasible(verdict)) => {
                if infeasible.is_none() {
                    infeasible = Some(Trial { delta: full, verdict });
                }
            }
            Err(e) => return Err(NmboError::Objective(e.to_string())),
        }
        scale = scale * cfg.backtrack_factor;
    }
    Ok(Backtrack::Rejected { infeasible })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmboStatus {
    /// Accepted step below threshold, stationary point, or nothing free.
    Converged,
    /// Trust radius fell below the step threshold after rejections.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmboOutcome<T> {
    pub state: OptState<T>,
    pub status: NmboStatus,
    /// Most recent infeasible trial, for variable elimination.
    pub last_infeasible: Option<Trial<T>>,
    pub accepted_steps: usize,
}

/// Runs the descent loop from `state`.
pub fn nmbo_run<T: Scalar>(
    state: OptState<T>,
    problem: &Problem<'_, T>,
    cfg: &NmboConfig<T>,
) -> Result<NmboOutcome<T>, NmboError> {
    nmbo_run_observed(state, problem, cfg, &mut |_: &OptState<T>| {})
}

/// [`nmbo_run`], calling `observer` on every accepted iterate.
pub fn nmbo_run_observed<T: Scalar>(
    mut state: OptState<T>,
    problem: &Problem<'_, T>,
    cfg: &NmboConfig<T>,
    observer: &mut dyn FnMut(&OptState<T>),
) -> Result<NmboOutcome<T>, NmboError> {
    cfg.validate()?;
    state.objective_value = problem.evaluate(&state.taskset)?;

    let free = state.free_ids();
    let lower: Vec<T> = free.iter().map(|&i| problem.bounds.period_min[i]).collect();
    let upper: Vec<T> = free.iter().map(|&i| problem.bounds.period_max[i]).collect();
    let mut radius = cfg.initial_trust_radius;
    let mut last_infeasible = None;
    let mut accepted_steps = 0;
    let mut status = NmboStatus::MaxIterations;

    if free.is_empty() {
        status = NmboStatus::Converged;
    }
    let mut iter = 0;
    while status == NmboStatus::MaxIterations && iter < cfg.max_iterations {
        iter += 1;
        state.inner_iter += 1;
        let x: Vec<T> = free.iter().map(|&i| state.taskset.tasks[i].period).collect();
        let objective = |xf: &[T]| problem.evaluate(&state.with_periods(problem.bounds, &free, xf)).ok();
        let gradient = match cfg.gradient {
            GradientScheme::Central => numeric_gradient(objective, &x, cfg.fd_step, &lower, &upper).ok(),
            GradientScheme::OneSided => descent_slopes(objective, &x, cfg.fd_step.max(radius), &lower, &upper),
        };
        let gradient_failed = gradient.is_none();
        let proposal = gradient.map(|g| propose_step(&x, &g, radius, &lower, &upper));
        let Some(proposal) = proposal.filter(|p| p.delta.iter().any(|&d| d != T::zero())) else {
            // Nothing helps at this scale; one-sided slopes are measured at
            // the trust radius, so look closer before giving up.
            if cfg.gradient == GradientScheme::OneSided && radius > cfg.fd_step {
                radius = (radius * cfg.backtrack_factor).max(cfg.fd_step);
                continue;
            }
            status = if gradient_failed { NmboStatus::Stalled } else { NmboStatus::Converged };
            break;
        };
        match feasibility_backtrack(&state, &free, &proposal.delta, problem, cfg)? {
            Backtrack::Accepted {
                delta,
                taskset,
                objective,
                backtracks,
                infeasible,
            } => {
                if infeasible.is_some() {
                    last_infeasible = infeasible;
                }
                state.taskset = taskset;
                state.objective_value = objective;
                accepted_steps += 1;
                observer(&state);
                let step = norm2(&delta);
                if step < cfg.step_threshold {
                    status = NmboStatus::Converged;
                } else if backtracks == 0 {
                    radius = (radius + radius).min(cfg.initial_trust_radius);
                } else {
                    radius = step;
                }
            }
            Backtrack::Rejected { infeasible } => {
                if infeasible.is_some() {
                    last_infeasible = infeasible;
                }
                radius = radius * cfg.backtrack_factor;
                if radius < cfg.step_threshold {
                    status = NmboStatus::Stalled;
                }
            }
        }
    }
    Ok(NmboOutcome {
        state,
        status,
        last_infeasible,
        accepted_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ResponseTimeAnalysis;
    use crate::model::ObjectiveWeights;
    use crate::objective::ControlObjective;
    use approx::assert_abs_diff_eq;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn slopes_keep_helpful_directions_only() {
        let lo = [0.0, 0.0, 0.0];
        let hi = [10.0, 10.0, 10.0];
        // Increasing in x0, decreasing in x1, a jump just below x2.
        let f = |x: &[f64]| Some(2.0 * x[0] - x[1] + if x[2] < 4.5 { 100.0 } else { 0.0 });
        let s = descent_slopes(f, &[5.0, 5.0, 5.0], 1.0, &lo, &hi).unwrap();
        assert_eq!(s, vec![2.0, -1.0, 0.0]);

        // Shortening x0 is infeasible; the forward slope stands in.
        let g = |x: &[f64]| (x[0] >= 5.0).then(|| 3.0 * x[0] + x[1]);
        let s = descent_slopes(g, &[5.0, 5.0, 5.0], 1.0, &lo, &hi).unwrap();
        assert_eq!(s, vec![3.0, 1.0, 0.0]);
        assert!(descent_slopes(|_: &[f64]| None, &[5.0], 1.0, &[0.0], &[10.0]).is_none());
    }

    #[test]
    fn gradient_of_square() {
        let g = numeric_gradient(|x: &[f64]| Some(x[0] * x[0]), &[3.0], 1e-3, &[-INF], &[INF]).unwrap();
        assert_abs_diff_eq!(g[0], 6.0, epsilon = 1e-6);
    }

    #[test]
    fn gradient_of_linear_is_exact() {
        let f = |x: &[f64]| Some(x[0] + 1000.0 * x[1]);
        let g = numeric_gradient(f, &[3.0, 7.0], 0.5, &[-INF; 2], &[INF; 2]).unwrap();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g[1], 1000.0, epsilon = 1e-9);
    }

    #[test]
    fn gradient_uses_one_sided_probe_at_bound_and_infeasibility() {
        let f = |x: &[f64]| if x[0] < 2.0 { None } else { Some(x[0] * x[0]) };
        // Lower probe infeasible: forward difference (4.41 - 4) / 0.1.
        let g = numeric_gradient(f, &[2.0], 0.1, &[0.0], &[10.0]).unwrap();
        assert_abs_diff_eq!(g[0], 4.1, epsilon = 1e-9);
        // Upper bound: backward difference.
        let g = numeric_gradient(f, &[3.0], 0.1, &[0.0], &[3.0]).unwrap();
        assert_abs_diff_eq!(g[0], 5.9, epsilon = 1e-9);
        let none = |_: &[f64]| None::<f64>;
        assert_eq!(
            numeric_gradient(none, &[1.0], 0.1, &[0.0], &[2.0]),
            Err(GradientError { coordinate: 0 })
        );
    }

    #[test]
    fn control_objective_gradient_on_lowest_priority_period() {
        let ts = TaskSet::from_pairs(&[(1.0, 4.0), (2.0, 6.0), (3.0, 10.0)]);
        let w = ObjectiveWeights::uniform(3, 1.0, 1.0);
        let bounds = VariableBounds::default_for(&ts);
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &bounds,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        };
        let state = OptState::new(&problem, ts.clone()).unwrap();
        let ids = [2];
        for h in [1e-3, 1e-2, 0.1, 0.5] {
            let g = numeric_gradient(
                |x| problem.evaluate(&state.with_periods(&bounds, &ids, x)).ok(),
                &[10.0],
                h,
                &bounds.period_min[2..],
                &bounds.period_max[2..],
            )
            .unwrap();
            assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn propose_step_examples() {
        let p = propose_step(&[10.0, 10.0], &[3.0, 4.0], 5.0, &[0.0; 2], &[100.0; 2]);
        assert_abs_diff_eq!(p.delta[0], -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.delta[1], -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.predicted_decrease, 25.0, epsilon = 1e-9);

        let p = propose_step(&[1.0, 1.0], &[0.0, 0.0], 5.0, &[0.0; 2], &[2.0; 2]);
        assert_eq!(p.delta, vec![0.0, 0.0]);

        let p = propose_step(&[1.5, 3.0], &[1.0, 0.0], 2.0, &[1.0, 1.0], &[10.0, 10.0]);
        assert_eq!(p.delta, vec![-0.5, 0.0]);
        assert!(p.predicted_decrease >= 0.0);
    }

    #[test]
    fn propose_step_drops_blocked_components() {
        let p = propose_step(&[1.0, 5.0], &[1.0, 1.0], 2.0, &[1.0, 1.0], &[10.0, 10.0]);
        assert_eq!(p.delta[0], 0.0);
        assert_abs_diff_eq!(p.delta[1], -2.0, epsilon = 1e-12);
    }

    struct Fixture {
        ts: TaskSet<f64>,
        w: ObjectiveWeights<f64>,
        bounds: VariableBounds<f64>,
    }

    impl Fixture {
        fn new(pairs: &[(f64, f64)], bounds: Option<VariableBounds<f64>>) -> Self {
            let ts = TaskSet::from_pairs(pairs);
            let w = ObjectiveWeights::uniform(ts.len(), 1.0, 1.0);
            let bounds = bounds.unwrap_or_else(|| VariableBounds::default_for(&ts));
            Fixture { ts, w, bounds }
        }

        fn problem(&self) -> Problem<'_, f64> {
            Problem {
                taskset: &self.ts,
                weights: &self.w,
                bounds: &self.bounds,
                oracle: &ResponseTimeAnalysis,
                objective: &ControlObjective,
            }
        }
    }

    #[test]
    fn backtrack_halves_into_feasibility() {
        let fx = Fixture::new(&[(2.0, 10.0), (2.0, 10.0)], None);
        let problem = fx.problem();
        let state = OptState::new(&problem, fx.ts.clone()).unwrap();
        let cfg = NmboConfig::scaled(&fx.bounds);
        let out = feasibility_backtrack(&state, &[0, 1], &[-7.0, -7.0], &problem, &cfg).unwrap();
        match out {
            Backtrack::Accepted {
                delta,
                backtracks,
                infeasible,
                taskset,
                ..
            } => {
                assert_eq!(delta, vec![-3.5, -3.5]);
                assert_eq!(backtracks, 1);
                assert_eq!(taskset.periods(), vec![6.5, 6.5]);
                let trial = infeasible.unwrap();
                assert_eq!(trial.delta, vec![-7.0, -7.0]);
                assert!(trial.verdict.miss_set.unwrap().contains(&1));
            }
            other => panic!("expected acceptance, got {other:?}"),
        }

        let out = feasibility_backtrack(&state, &[0, 1], &[-1.0, -1.0], &problem, &cfg).unwrap();
        assert!(matches!(out, Backtrack::Accepted { backtracks: 0, ref delta, .. } if delta == &vec![-1.0, -1.0]));

        let out = feasibility_backtrack(&state, &[0, 1], &[0.0, 0.0], &problem, &cfg).unwrap();
        assert_eq!(out, Backtrack::Rejected { infeasible: None });
    }

    #[test]
    fn single_task_reaches_lower_bound() {
        let ts = TaskSet::from_pairs(&[(1.0, 5.0)]);
        let fx = Fixture::new(&[(1.0, 5.0)], Some(VariableBounds::default_for(&ts)));
        let problem = fx.problem();
        let state = OptState::new(&problem, fx.ts.clone()).unwrap();
        assert_eq!(state.objective_value, 6.0);
        let out = nmbo_run(state, &problem, &NmboConfig::scaled(&fx.bounds)).unwrap();
        assert_eq!(out.status, NmboStatus::Converged);
        assert_abs_diff_eq!(out.state.taskset.tasks[0].period, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.state.objective_value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn two_tasks_approach_grid_optimum() {
        let fx = Fixture::new(&[(1.0, 10.0), (1.0, 10.0)], None);
        let problem = fx.problem();
        let state = OptState::new(&problem, fx.ts.clone()).unwrap();
        let mut seen = Vec::new();
        let out = nmbo_run_observed(state, &problem, &NmboConfig::scaled(&fx.bounds), &mut |s| {
            seen.push(s.clone())
        })
        .unwrap();
        let grid_best = brute_force_two_task_grid();
        assert_abs_diff_eq!(grid_best, 7.0, epsilon = 1e-9);
        assert!(out.state.objective_value <= grid_best * 1.01, "{}", out.state.objective_value);
        for pair in seen.windows(2) {
            assert!(pair[1].objective_value < pair[0].objective_value);
        }
        for s in &seen {
            assert!(problem.is_schedulable(&s.taskset));
        }
    }

    /// 0.01-step grid over `T1, T2` in `[1, 10]` for `C = (1, 1)`, unit weights.
    fn brute_force_two_task_grid() -> f64 {
        let mut best = f64::INFINITY;
        for a in 100..=1000 {
            for b in 100..=1000 {
                let ts = TaskSet::from_pairs(&[(1.0, a as f64 / 100.0), (1.0, b as f64 / 100.0)]);
                let v = crate::analysis::analyze(&ts);
                if v.schedulable {
                    let r = v.response_times.unwrap();
                    best = best.min(ts.tasks[0].period + ts.tasks[1].period + r[0] + r[1]);
                }
            }
        }
        best
    }

    #[test]
    fn frozen_periods_do_not_move() {
        let fx = Fixture::new(&[(1.0, 10.0), (1.0, 10.0), (2.0, 10.0)], None);
        let problem = fx.problem();
        let mut state = OptState::new(&problem, fx.ts.clone()).unwrap();
        state.frozen.insert(1);
        let mut periods = Vec::new();
        let out = nmbo_run_observed(state, &problem, &NmboConfig::scaled(&fx.bounds), &mut |s| {
            periods.push(s.taskset.tasks[1].period.to_bits())
        })
        .unwrap();
        assert!(periods.iter().all(|&p| p == 10.0f64.to_bits()));
        assert_eq!(out.state.taskset.tasks[1].period, 10.0);
        assert!(out.state.objective_value < 37.0);
    }

    #[test]
    fn stationary_start_is_returned_unchanged() {
        let fx = Fixture::new(&[(1.0, 1.0)], None);
        let problem = fx.problem();
        let state = OptState::new(&problem, fx.ts.clone()).unwrap();
        let out = nmbo_run(state.clone(), &problem, &NmboConfig::scaled(&fx.bounds)).unwrap();
        assert_eq!(out.status, NmboStatus::Converged);
        assert_eq!(out.state.taskset, state.taskset);
        assert_eq!(out.accepted_steps, 0);
    }

    #[test]
    fn infeasible_start_is_an_error() {
        let fx = Fixture::new(&[(3.0, 4.0), (2.0, 4.0)], None);
        let problem = fx.problem();
        let state = OptState {
            taskset: fx.ts.clone(),
            frozen: Default::default(),
            objective_value: 0.0,
            outer_iter: 0,
            inner_iter: 0,
        };
        assert_eq!(
            nmbo_run(state, &problem, &NmboConfig::scaled(&fx.bounds)),
            Err(NmboError::InitialInfeasible)
        );
    }

    #[test]
    fn works_in_single_precision() {
        let ts = TaskSet::from_pairs(&[(1.0f32, 10.0), (1.0, 10.0)]);
        let w = ObjectiveWeights::uniform(2, 1.0f32, 1.0);
        let bounds = VariableBounds::default_for(&ts);
        let problem = Problem {
            taskset: &ts,
            weights: &w,
            bounds: &bounds,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        };
        let state = OptState::new(&problem, ts.clone()).unwrap();
        let out = nmbo_run(state, &problem, &NmboConfig::scaled(&bounds)).unwrap();
        assert!(out.state.objective_value <= 7.07);
        assert!(problem.is_schedulable(&out.state.taskset));
    }
}

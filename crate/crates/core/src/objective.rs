//! Design objectives and the relative-gap metric.

use thiserror::Error;

use crate::analysis::{AnalysisVerdict, Capability, SchedOracle};
use crate::model::{ObjectiveWeights, TaskId, TaskSet};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError<T: std::fmt::Debug> {
    /// The constraint rejected the point; the verdict is kept for elimination.
    #[error("task set is not schedulable")]
    Infeasible(AnalysisVerdict<T>),
    #[error("objective needs per-task response times but the oracle is boolean-only")]
    NeedsResponseTimes,
    #[error("response time of task {0} diverged")]
    Diverged(TaskId),
    #[error("weights cover {weights} tasks, task set has {tasks}")]
    WeightLength { weights: usize, tasks: usize },
}

/// Scalar design objective `F(x)`. Evaluation fails on infeasible points.
pub trait ObjectiveFn<T: Scalar>: Send + Sync {
    fn evaluate(
        &self,
        ts: &TaskSet<T>,
        weights: &ObjectiveWeights<T>,
        oracle: &dyn SchedOracle<T>,
    ) -> Result<T, ObjectiveError<T>>;
}

/// `sum_i alpha_i T_i + beta_i r_i`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ControlObjective;

impl<T: Scalar> ObjectiveFn<T> for ControlObjective {
    fn evaluate(
        &self,
        ts: &TaskSet<T>,
        weights: &ObjectiveWeights<T>,
        oracle: &dyn SchedOracle<T>,
    ) -> Result<T, ObjectiveError<T>> {
        control_objective(ts, weights, oracle)
    }
}

/// `sum_i alpha_i T_i`, ignoring `beta`. Only needs the boolean verdict.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightedPeriods;

impl<T: Scalar> ObjectiveFn<T> for WeightedPeriods {
    fn evaluate(
        &self,
        ts: &TaskSet<T>,
        weights: &ObjectiveWeights<T>,
        oracle: &dyn SchedOracle<T>,
    ) -> Result<T, ObjectiveError<T>> {
        check_lengths(ts, weights)?;
        let verdict = oracle.query(ts);
        if !verdict.schedulable {
            return Err(ObjectiveError::Infeasible(verdict));
        }
        Ok(ts
            .tasks
            .iter()
            .zip(&weights.alpha)
            .map(|(t, &a)| a * t.period)
            .sum())
    }
}

fn check_lengths<T: Scalar>(ts: &TaskSet<T>, w: &ObjectiveWeights<T>) -> Result<(), ObjectiveError<T>> {
    if w.alpha.len() != ts.len() || w.beta.len() != ts.len() {
        return Err(ObjectiveError::WeightLength {
            weights: w.alpha.len().min(w.beta.len()),
            tasks: ts.len(),
        });
    }
    Ok(())
}

/// Control-performance cost `sum_i (alpha_i T_i + beta_i r_i)` with `r_i`
/// taken from the oracle's detailed verdict.
pub fn control_objective<T: Scalar>(
    ts: &TaskSet<T>,
    weights: &ObjectiveWeights<T>,
    oracle: &dyn SchedOracle<T>,
) -> Result<T, ObjectiveError<T>> {
    check_lengths(ts, weights)?;
    if oracle.capability() == Capability::BooleanOnly {
        return Err(ObjectiveError::NeedsResponseTimes);
    }
    let verdict = oracle.query(ts);
    if !verdict.schedulable {
        return Err(ObjectiveError::Infeasible(verdict));
    }
    let r = verdict
        .response_times
        .as_ref()
        .ok_or(ObjectiveError::NeedsResponseTimes)?;
    if let Some(i) = r.iter().position(|x| !x.is_finite()) {
        return Err(ObjectiveError::Diverged(i));
    }
    Ok(ts
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| weights.alpha[i] * t.period + weights.beta[i] * r[i])
        .sum())
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("relative gap undefined: baseline objective is zero")]
pub struct ZeroBaseline;

/// `(f_a - f_b) / f_b * 100`. Negative when `f_a` is the lower (better) cost.
pub fn objective_gap<T: Scalar>(f_a: T, f_b: T) -> Result<T, ZeroBaseline> {
    if f_b == T::zero() {
        return Err(ZeroBaseline);
    }
    Ok((f_a - f_b) / f_b * T::lit(100.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{as_boolean_blackbox, ResponseTimeAnalysis};
    use proptest::prelude::*;

    fn three() -> TaskSet<f64> {
        TaskSet::from_pairs(&[(1.0, 4.0), (2.0, 6.0), (3.0, 10.0)])
    }

    #[test]
    fn control_objective_examples() {
        let ts = three();
        let f = control_objective(&ts, &ObjectiveWeights::uniform(3, 1.0, 1.0), &ResponseTimeAnalysis);
        assert_eq!(f, Ok(34.0));
        let f = control_objective(&ts, &ObjectiveWeights::uniform(3, 2.0, 0.5), &ResponseTimeAnalysis);
        assert_eq!(f, Ok(47.0));
        let one = TaskSet::from_pairs(&[(1.0, 1.0)]);
        let f = control_objective(&one, &ObjectiveWeights::uniform(1, 1.0, 1.0), &ResponseTimeAnalysis);
        assert_eq!(f, Ok(2.0));
    }

    #[test]
    fn control_objective_errors() {
        let w = ObjectiveWeights::uniform(3, 1.0, 1.0);
        let bb = as_boolean_blackbox(ResponseTimeAnalysis);
        assert_eq!(control_objective(&three(), &w, &bb), Err(ObjectiveError::NeedsResponseTimes));

        let bad = TaskSet::from_pairs(&[(3.0, 4.0), (2.0, 4.0)]);
        let w2 = ObjectiveWeights::uniform(2, 1.0, 1.0);
        assert!(matches!(
            control_objective(&bad, &w2, &ResponseTimeAnalysis),
            Err(ObjectiveError::Infeasible(v)) if v.miss_set.as_ref().unwrap().contains(&1)
        ));
        assert!(matches!(
            control_objective(&three(), &w2, &ResponseTimeAnalysis),
            Err(ObjectiveError::WeightLength { .. })
        ));
    }

    #[test]
    fn weighted_periods_works_with_boolean_oracle() {
        let bb = as_boolean_blackbox(ResponseTimeAnalysis);
        let w = ObjectiveWeights::uniform(3, 1.0, 1.0);
        assert_eq!(WeightedPeriods.evaluate(&three(), &w, &bb), Ok(20.0));
    }

    #[test]
    fn gap_examples() {
        assert_eq!(objective_gap(80.0, 100.0), Ok(-20.0));
        assert_eq!(objective_gap(34.0, 34.0), Ok(0.0));
        assert_eq!(objective_gap(120.0, 100.0), Ok(20.0));
        assert_eq!(objective_gap(1.0, 0.0), Err(ZeroBaseline));
    }

    proptest! {
        #[test]
        fn gap_is_scale_invariant(a in 1.0f64..1e6, b in 1.0f64..1e6, s in 0.01f64..100.0) {
            let g = objective_gap(a, b).unwrap();
            let gs = objective_gap(a * s, b * s).unwrap();
            prop_assert!((g - gs).abs() <= 1e-9 * g.abs().max(1.0));
            prop_assert_eq!(objective_gap(a, a).unwrap(), 0.0);
        }

        #[test]
        fn objective_is_increasing_in_periods(
            scale in 1.0f64..3.0, a in 0.5f64..10.0, b in 0.5f64..10.0,
        ) {
            // Lengthening the lowest-priority period leaves every r_i fixed.
            let ts = three();
            let mut longer = ts.clone();
            longer.set_period(2, 10.0 * scale + 0.5);
            let w = ObjectiveWeights::uniform(3, a, b);
            let f0 = control_objective(&ts, &w, &ResponseTimeAnalysis).unwrap();
            let f1 = control_objective(&longer, &w, &ResponseTimeAnalysis).unwrap();
            prop_assert!(f1 > f0);

            // With beta = 0 only the weighted period sum remains.
            let weighted = ObjectiveWeights::uniform(3, a, 0.0);
            let f_weighted = control_objective(&ts, &weighted, &ResponseTimeAnalysis).unwrap();
            prop_assert!((f_weighted - a * 20.0).abs() < 1e-9);
        }
    }
}

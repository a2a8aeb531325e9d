//! Schedulability oracles.
//!
//! [`SchedOracle`] is the black-box constraint: a task set goes in, a
//! verdict comes out. [`ResponseTimeAnalysis`] is the built-in oracle for
//! fixed-priority preemptive scheduling on one processor. [`simulate`] is
//! an independent discrete-event simulator used to check it.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::model::{utilization, TaskId, TaskSet};
use crate::scalar::Scalar;

pub mod simulate;

pub use simulate::{simulate_oracle, SimError};

/// Iterates beyond this magnitude are treated as divergent.
pub const DIVERGENCE_CAP: f64 = 2_147_483_648.0;
pub const MAX_FIXED_POINT_ITERATIONS: usize = 1_000_000;

/// Outcome of the response-time recurrence for one task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseTime<T> {
    /// Least fixed point.
    Converged(T),
    /// The iterate passed the requested limit before converging; carries that iterate.
    ExceedsLimit(T),
    /// Passed the divergence cap or the iteration budget.
    Diverged,
}

impl<T: Scalar> ResponseTime<T> {
    pub fn value(&self) -> Option<T> {
        match *self {
            ResponseTime::Converged(r) | ResponseTime::ExceedsLimit(r) => Some(r),
            ResponseTime::Diverged => None,
        }
    }

    /// Value for reporting; divergence maps to +inf.
    pub fn value_or_inf(&self) -> T {
        self.value().unwrap_or_else(T::infinity)
    }
}

/// Higher-priority interferers of task `i` as `(wcet, period)` pairs.
fn interferers<T: Scalar>(ts: &TaskSet<T>, i: TaskId) -> Vec<(T, T)> {
    let rank = ts.tasks[i].priority;
    ts.tasks
        .iter()
        .filter(|t| t.priority < rank)
        .map(|t| (t.wcet, t.period))
        .collect()
}

fn fixed_point<T: Scalar>(wcet: T, hp: &[(T, T)], limit: T) -> ResponseTime<T> {
    let cap = T::lit(DIVERGENCE_CAP);
    let mut r = wcet;
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let next = wcet + hp.iter().map(|&(c, t)| (r / t).ceil() * c).sum::<T>();
        if (next - r).abs() < T::fixed_point_tol(next) {
            return ResponseTime::Converged(next);
        }
        if next > cap || !next.is_finite() {
            return ResponseTime::Diverged;
        }
        if next > limit {
            return ResponseTime::ExceedsLimit(next);
        }
        r = next;
    }
    ResponseTime::Diverged
}

/// Least fixed point of `r = C_i + sum_{j in hp(i)} ceil(r / T_j) C_j`,
/// iterated from `r = C_i`.
pub fn response_time<T: Scalar>(ts: &TaskSet<T>, i: TaskId) -> ResponseTime<T> {
    let task = &ts.tasks[i];
    fixed_point(task.wcet, &interferers(ts, i), T::infinity())
}

/// Same recurrence, stopping as soon as the iterate exceeds `limit`.
pub fn response_time_within<T: Scalar>(ts: &TaskSet<T>, i: TaskId, limit: T) -> ResponseTime<T> {
    let task = &ts.tasks[i];
    fixed_point(task.wcet, &interferers(ts, i), limit)
}

/// What an oracle can report besides the boolean verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    Detailed,
    BooleanOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisVerdict<T> {
    pub schedulable: bool,
    pub response_times: Option<Vec<T>>,
    pub miss_set: Option<BTreeSet<TaskId>>,
}

impl<T: Scalar> AnalysisVerdict<T> {
    pub fn boolean(schedulable: bool) -> Self {
        AnalysisVerdict {
            schedulable,
            response_times: None,
            miss_set: None,
        }
    }

    pub fn without_details(&self) -> Self {
        Self::boolean(self.schedulable)
    }
}

/// Deterministic, side-effect free schedulability test.
pub trait SchedOracle<T: Scalar>: Send + Sync {
    fn query(&self, ts: &TaskSet<T>) -> AnalysisVerdict<T>;

    fn capability(&self) -> Capability;
}

impl<T: Scalar, O: SchedOracle<T> + ?Sized> SchedOracle<T> for &O {
    fn query(&self, ts: &TaskSet<T>) -> AnalysisVerdict<T> {
        (**self).query(ts)
    }

    fn capability(&self) -> Capability {
        (**self).capability()
    }
}

/// Classical response-time analysis for fixed-priority preemptive
/// uniprocessor scheduling.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResponseTimeAnalysis;

impl<T: Scalar> SchedOracle<T> for ResponseTimeAnalysis {
    fn query(&self, ts: &TaskSet<T>) -> AnalysisVerdict<T> {
        analyze(ts)
    }

    fn capability(&self) -> Capability {
        Capability::Detailed
    }
}

/// Runs the response-time recurrence for every task and checks `r_i <= D_i`.
///
/// Iteration for a task stops once its iterate exceeds the deadline; the
/// reported response time is then that over-deadline iterate. When total
/// utilization exceeds one, the lowest-priority task is marked divergent
/// without iterating.
pub fn analyze<T: Scalar>(ts: &TaskSet<T>) -> AnalysisVerdict<T> {
    let overloaded = utilization(ts) > T::one();
    let lowest = ts.priority_order().last().copied();
    let mut response_times = Vec::with_capacity(ts.len());
    let mut miss_set = BTreeSet::new();
    for (i, task) in ts.tasks.iter().enumerate() {
        let rt = if overloaded && Some(i) == lowest {
            ResponseTime::Diverged
        } else {
            response_time_within(ts, i, task.deadline)
        };
        let r = rt.value_or_inf();
        if !matches!(rt, ResponseTime::Converged(_)) || r > task.deadline {
            miss_set.insert(i);
        }
        response_times.push(r);
    }
    AnalysisVerdict {
        schedulable: miss_set.is_empty(),
        response_times: Some(response_times),
        miss_set: Some(miss_set),
    }
}

/// Exposes only the boolean verdict of the wrapped oracle.
#[derive(Debug, Clone, Copy)]
pub struct BooleanOnly<O>(pub O);

impl<T: Scalar, O: SchedOracle<T>> SchedOracle<T> for BooleanOnly<O> {
    fn query(&self, ts: &TaskSet<T>) -> AnalysisVerdict<T> {
        self.0.query(ts).without_details()
    }

    fn capability(&self) -> Capability {
        Capability::BooleanOnly
    }
}

pub fn as_boolean_blackbox<O>(oracle: O) -> BooleanOnly<O> {
    BooleanOnly(oracle)
}

/// Counts queries passed to the wrapped oracle.
#[derive(Debug, Default)]
pub struct CountingOracle<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<T: Scalar, O: SchedOracle<T>> SchedOracle<T> for CountingOracle<O> {
    fn query(&self, ts: &TaskSet<T>) -> AnalysisVerdict<T> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.query(ts)
    }

    fn capability(&self) -> Capability {
        self.inner.capability()
    }
}

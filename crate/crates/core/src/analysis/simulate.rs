//! Tick-exact simulation of synchronous-release, fixed-priority preemptive
//! scheduling on one processor.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::TaskSet;
use crate::scalar::Scalar;

/// Longest horizon the simulator accepts, in ticks.
pub const HORIZON_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("task {id}: {field} must be a positive integer, got {value}")]
    NonInteger {
        id: usize,
        field: &'static str,
        value: f64,
    },
    #[error("horizon {0} exceeds the cap of {HORIZON_CAP} ticks")]
    HorizonTooLarge(u64),
    #[error("horizon must be at least one tick")]
    EmptyHorizon,
}

fn as_ticks<T: Scalar>(v: T, id: usize, field: &'static str) -> Result<u64, SimError> {
    let f = v.to_f64().unwrap_or(f64::NAN);
    if f.is_finite() && f >= 1.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(SimError::NonInteger {
            id,
            field,
            value: f,
        })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Hyperperiod of the given periods, saturating at [`HORIZON_CAP`].
pub fn hyperperiod_capped(periods: &[u64]) -> u64 {
    let mut acc: u64 = 1;
    for &p in periods {
        let l = (acc / gcd(acc, p)).saturating_mul(p);
        if l > HORIZON_CAP {
            return HORIZON_CAP;
        }
        acc = l;
    }
    acc
}

struct Job {
    release: u64,
    remaining: u64,
}

/// Worst observed response time of each task over the jobs released in
/// `[0, horizon)`. Jobs released before the horizon run to completion even
/// if that extends past it.
///
/// `horizon = None` uses the hyperperiod, capped at [`HORIZON_CAP`].
pub fn simulate_oracle<T: Scalar>(ts: &TaskSet<T>, horizon: Option<u64>) -> Result<Vec<u64>, SimError> {
    let n = ts.len();
    let mut wcet = Vec::with_capacity(n);
    let mut period = Vec::with_capacity(n);
    for (i, t) in ts.tasks.iter().enumerate() {
        wcet.push(as_ticks(t.wcet, i, "wcet")?);
        period.push(as_ticks(t.period, i, "period")?);
    }
    let horizon = match horizon {
        Some(0) => return Err(SimError::EmptyHorizon),
        Some(h) if h > HORIZON_CAP => return Err(SimError::HorizonTooLarge(h)),
        Some(h) => h,
        None => hyperperiod_capped(&period),
    };

    let order = ts.priority_order();
    let mut queues: Vec<VecDeque<Job>> = (0..n).map(|_| VecDeque::new()).collect();
    let mut next_release = vec![0u64; n];
    let mut worst = vec![0u64; n];
    let mut t: u64 = 0;

    loop {
        for i in 0..n {
            while next_release[i] <= t && next_release[i] < horizon {
                queues[i].push_back(Job {
                    release: next_release[i],
                    remaining: wcet[i],
                });
                next_release[i] += period[i];
            }
        }
        let upcoming = next_release
            .iter()
            .copied()
            .filter(|&r| r < horizon)
            .min();
        let Some(&running) = order.iter().find(|&&i| !queues[i].is_empty()) else {
            match upcoming {
                Some(r) => {
                    t = r;
                    continue;
                }
                None => break,
            }
        };
        let job = queues[running].front_mut().expect("non-empty queue");
        let finish = t + job.remaining;
        match upcoming {
            Some(r) if r < finish => {
                job.remaining -= r - t;
                t = r;
            }
            _ => {
                t = finish;
                let resp = finish - job.release;
                worst[running] = worst[running].max(resp);
                queues[running].pop_front();
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_worked_examples() {
        let ts = TaskSet::from_pairs(&[(1.0, 4.0), (2.0, 6.0), (3.0, 10.0)]);
        assert_eq!(simulate_oracle(&ts, None).unwrap(), vec![1, 3, 10]);
        let ts = TaskSet::from_pairs(&[(5.0, 9.0)]);
        assert_eq!(simulate_oracle(&ts, None).unwrap(), vec![5]);
        let ts = TaskSet::from_pairs(&[(2.0, 5.0), (3.0, 5.0)]);
        assert_eq!(simulate_oracle(&ts, None).unwrap(), vec![2, 5]);
    }

    #[test]
    fn priorities_are_respected() {
        let ts = TaskSet::from_pairs_with_priorities(&[(2.0, 5.0), (3.0, 5.0)], &[1, 0]);
        assert_eq!(simulate_oracle(&ts, None).unwrap(), vec![5, 3]);
    }

    #[test]
    fn rejects_bad_input() {
        let ts = TaskSet::from_pairs(&[(1.5, 4.0)]);
        assert!(matches!(simulate_oracle(&ts, None), Err(SimError::NonInteger { field: "wcet", .. })));
        let ts = TaskSet::from_pairs(&[(1.0, 4.0)]);
        assert_eq!(
            simulate_oracle(&ts, Some(HORIZON_CAP + 1)),
            Err(SimError::HorizonTooLarge(HORIZON_CAP + 1))
        );
        assert_eq!(simulate_oracle(&ts, Some(0)), Err(SimError::EmptyHorizon));
    }

    #[test]
    fn hyperperiod_saturates() {
        assert_eq!(hyperperiod_capped(&[4, 6, 10]), 60);
        assert_eq!(hyperperiod_capped(&[9_999_991, 9_999_973]), HORIZON_CAP);
    }
}

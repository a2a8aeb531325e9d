//! Random task-set generation and the NORTH vs NORTH+ comparison harness.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ResponseTimeAnalysis;
use crate::discrete::PriorityPolicy;
use crate::model::{ObjectiveWeights, Task, TaskSet, VariableBounds};
use crate::objective::{objective_gap, ControlObjective};
use crate::orchestrator::{optimize, Method, RunConfig, Solution, Status};
use crate::problem::Problem;
use crate::report::sig6;
use crate::scalar::Scalar;

/// Name of the pseudo-random generator behind every sampled value.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), per-set seed = base seed + set index";

/// Upper edges of the gap histogram bins, in percent. The first bin starts at -100.
pub const GAP_BIN_EDGES: [f64; 9] = [-40.0, -30.0, -20.0, -10.0, -5.0, 0.0, 5.0, 10.0, f64::INFINITY];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_tasks: usize,
    pub wcet_range: (u32, u32),
    pub period_cap_factor: f64,
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_tasks: 20,
            wcet_range: (1, 100),
            period_cap_factor: 5.0,
            alpha_range: (1.0, 1000.0),
            beta_range: (1.0, 10000.0),
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("invalid generation parameters: {0}")]
    BadParams(&'static str),
    #[error("summary of an empty report")]
    EmptyReport,
    #[error("io: {0}")]
    Io(String),
}

impl GenParams {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n_tasks == 0 {
            return Err(BenchError::BadParams("n_tasks must be positive"));
        }
        if self.wcet_range.0 == 0 || self.wcet_range.0 > self.wcet_range.1 {
            return Err(BenchError::BadParams("wcet range must be a non-empty range of positive integers"));
        }
        if !(self.period_cap_factor > 0.0) {
            return Err(BenchError::BadParams("period cap factor must be positive"));
        }
        for (lo, hi) in [self.alpha_range, self.beta_range] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(BenchError::BadParams("weight ranges must be non-empty and positive"));
            }
        }
        Ok(())
    }

    pub fn set_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

/// One generated instance. Periods start at their upper bound with ids as ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated<T> {
    pub taskset: TaskSet<T>,
    pub weights: ObjectiveWeights<T>,
    pub bounds: VariableBounds<T>,
    pub seed: u64,
}

impl<T: Scalar> Generated<T> {
    pub fn problem(&self) -> Problem<'_, T> {
        Problem {
            taskset: &self.taskset,
            weights: &self.weights,
            bounds: &self.bounds,
            oracle: &ResponseTimeAnalysis,
            objective: &ControlObjective,
        }
    }
}

/// Draws set number `index`: integer WCETs uniform over `wcet_range`,
/// `period_max = factor * sum(C)`, `period_min = C_i`, weights uniform over
/// their ranges.
pub fn generate_taskset<T: Scalar>(params: &GenParams, index: usize) -> Generated<T> {
    let seed = params.set_seed(index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n_tasks;
    let wcets: Vec<u32> = (0..n)
        .map(|_| rng.random_range(params.wcet_range.0..=params.wcet_range.1))
        .collect();
    let mut uniform = |(lo, hi): (f64, f64)| -> T {
        if lo == hi {
            T::lit(lo)
        } else {
            T::lit(rng.random_range(lo..=hi))
        }
    };
    let alpha: Vec<T> = (0..n).map(|_| uniform(params.alpha_range)).collect();
    let beta: Vec<T> = (0..n).map(|_| uniform(params.beta_range)).collect();

    let total: u64 = wcets.iter().map(|&c| c as u64).sum();
    let cap = T::lit(params.period_cap_factor) * T::lit(total as f64);
    let tasks = wcets
        .iter()
        .enumerate()
        .map(|(i, &c)| Task::new(i, T::lit(c as f64), cap, i))
        .collect();
    let taskset = TaskSet::new(tasks);
    let bounds = VariableBounds {
        period_min: taskset.wcets(),
        period_max: vec![cap; n],
    };
    Generated {
        taskset,
        weights: ObjectiveWeights { alpha, beta },
        bounds,
        seed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub set_id: usize,
    pub seed: u64,
    pub n_tasks: usize,
    pub f_north: f64,
    pub f_plus: f64,
    pub gap_percent: Option<f64>,
    pub t_north_ms: f64,
    pub t_plus_ms: f64,
    pub status_north: Status,
    pub status_plus: Status,
}

impl BenchRecord {
    fn comparable(&self) -> bool {
        self.status_north != Status::InitialInfeasible
            && self.status_plus != Status::InitialInfeasible
            && self.gap_percent.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    /// `None` for the open-ended last bin.
    pub hi: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub excluded: usize,
    pub mean_gap: f64,
    pub median_gap: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub improved: usize,
    pub worsened: usize,
    pub histogram: Vec<HistogramBin>,
    pub mean_t_north_ms: f64,
    pub mean_t_plus_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMetadata {
    pub rng: String,
    pub gen: GenParams,
    pub n_sets: usize,
    pub max_outer: usize,
    pub outer_rel_tol: f64,
    pub plus_method: String,
    pub nmbo: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub metadata: BenchMetadata,
    pub records: Vec<BenchRecord>,
    pub summary: Option<Summary>,
}

/// Options for [`run_benchmark`] beyond the generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub run: RunConfig<f64>,
    pub plus_policy: PriorityPolicy,
    /// `None` uses rayon's global pool.
    pub workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            run: RunConfig::new(Method::North),
            plus_policy: PriorityPolicy::RateMonotonic,
            workers: None,
        }
    }
}

fn timed(problem: &Problem<'_, f64>, cfg: &RunConfig<f64>) -> (Solution<f64>, f64) {
    let start = Instant::now();
    let sol = optimize(problem, cfg).unwrap_or_else(|_| Solution {
        taskset: problem.taskset.clone(),
        objective: f64::NAN,
        status: Status::InitialInfeasible,
        trace: Vec::new(),
    });
    (sol, start.elapsed().as_secs_f64() * 1e3)
}

/// Runs both methods on one generated set from the same initial point.
pub fn compare_on(set_id: usize, generated: &Generated<f64>, cfg: &BenchConfig) -> BenchRecord {
    let problem = generated.problem();
    let (north, t_north_ms) = timed(&problem, &cfg.run.with_method(Method::North));
    let plus_method = Method::NorthPlus {
        policy: cfg.plus_policy,
    };
    let (plus, t_plus_ms) = timed(&problem, &cfg.run.with_method(plus_method));
    let gap_percent = if north.objective.is_finite() && plus.objective.is_finite() {
        objective_gap(plus.objective, north.objective).ok()
    } else {
        None
    };
    BenchRecord {
        set_id,
        seed: generated.seed,
        n_tasks: generated.taskset.len(),
        f_north: north.objective,
        f_plus: plus.objective,
        gap_percent,
        t_north_ms,
        t_plus_ms,
        status_north: north.status,
        status_plus: plus.status,
    }
}

pub fn run_benchmark(params: &GenParams, n_sets: usize, cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    params.validate()?;
    if n_sets == 0 {
        return Err(BenchError::BadParams("n_sets must be at least 1"));
    }
    let work = || -> Vec<BenchRecord> {
        (0..n_sets)
            .into_par_iter()
            .map(|i| compare_on(i, &generate_taskset::<f64>(params, i), cfg))
            .collect()
    };
    let records = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| BenchError::Io(e.to_string()))?
            .install(work),
        None => work(),
    };
    let summary = summarize(&records).ok();
    let plus = Method::NorthPlus {
        policy: cfg.plus_policy,
    };
    Ok(BenchReport {
        metadata: BenchMetadata {
            rng: RNG_NAME.to_string(),
            gen: params.clone(),
            n_sets,
            max_outer: cfg.run.max_outer,
            outer_rel_tol: cfg.run.outer_rel_tol,
            plus_method: plus.name(),
            nmbo: match &cfg.run.nmbo {
                Some(n) => format!("{n:?}"),
                None => "scaled by mean period_max: step_threshold 1e-2, fd_step 1e-3, \
                         initial_trust_radius 0.1; backtrack_factor 0.5, max_backtracks 30, \
                         max_iterations 500"
                    .to_string(),
            },
        },
        records,
        summary,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Aggregates the comparable records (both methods started feasibly).
pub fn summarize(records: &[BenchRecord]) -> Result<Summary, BenchError> {
    let usable: Vec<&BenchRecord> = records.iter().filter(|r| r.comparable()).collect();
    if usable.is_empty() {
        return Err(BenchError::EmptyReport);
    }
    let mut gaps: Vec<f64> = usable.iter().filter_map(|r| r.gap_percent).collect();
    gaps.sort_by(f64::total_cmp);
    let mut histogram = Vec::with_capacity(GAP_BIN_EDGES.len());
    let mut lo = -100.0;
    for &hi in &GAP_BIN_EDGES {
        let count = gaps
            .iter()
            .filter(|&&g| (g >= lo || lo == -100.0) && g < hi)
            .count();
        histogram.push(HistogramBin {
            lo,
            hi: hi.is_finite().then_some(hi),
            count,
        });
        lo = hi;
    }
    let t_north: Vec<f64> = usable.iter().map(|r| r.t_north_ms).collect();
    let t_plus: Vec<f64> = usable.iter().map(|r| r.t_plus_ms).collect();
    Ok(Summary {
        count: gaps.len(),
        excluded: records.len() - usable.len(),
        mean_gap: mean(&gaps),
        median_gap: median(&gaps),
        min_gap: gaps[0],
        max_gap: gaps[gaps.len() - 1],
        improved: gaps.iter().filter(|&&g| g < 0.0).count(),
        worsened: gaps.iter().filter(|&&g| g > 0.0).count(),
        histogram,
        mean_t_north_ms: mean(&t_north),
        mean_t_plus_ms: mean(&t_plus),
    })
}

pub const CSV_HEADER: [&str; 10] = [
    "set_id",
    "seed",
    "n_tasks",
    "f_north",
    "f_plus",
    "gap_percent",
    "t_north_ms",
    "t_plus_ms",
    "status_north",
    "status_plus",
];

/// One CSV row per record, numbers at six significant digits.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| BenchError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.set_id.to_string(),
            r.seed.to_string(),
            r.n_tasks.to_string(),
            sig6(r.f_north),
            sig6(r.f_plus),
            r.gap_percent.map(sig6).unwrap_or_default(),
            sig6(r.t_north_ms),
            sig6(r.t_plus_ms),
            r.status_north.as_str().to_string(),
            r.status_plus.as_str().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| BenchError::Io(e.to_string()))
}

//! Optimization of periodic real-time task systems under a black-box
//! schedulability constraint.
//!
//! Task periods (continuous) are tuned by a feasibility-preserving
//! descent with variable elimination; priority assignments (discrete) are
//! re-derived by a heuristic between continuous rounds. The numeric core
//! is generic over [`Scalar`] (`f32`/`f64`); the aliases below fix it to
//! `f64`, which is what the file formats and CLI use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod discrete;
pub mod elimination;
pub mod io;
pub mod model;
pub mod nmbo;
pub mod objective;
pub mod orchestrator;
pub mod problem;
pub mod report;
pub mod scalar;

pub use analysis::{
    analyze, as_boolean_blackbox, response_time, simulate_oracle, AnalysisVerdict, Capability,
    ResponseTime, ResponseTimeAnalysis, SchedOracle,
};
pub use model::{apply_assignment, utilization, validate_taskset, Task, TaskId, TaskSet};
pub use objective::{control_objective, objective_gap, ControlObjective, ObjectiveFn};
pub use problem::{OptState, Problem};
pub use scalar::Scalar;

pub type Task64 = model::Task<f64>;
pub type TaskSet64 = model::TaskSet<f64>;
pub type TaskSet32 = model::TaskSet<f32>;
pub type Bounds64 = model::VariableBounds<f64>;
pub type Weights64 = model::ObjectiveWeights<f64>;
pub type Verdict64 = analysis::AnalysisVerdict<f64>;
pub type NmboConfig64 = nmbo::NmboConfig<f64>;

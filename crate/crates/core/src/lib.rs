//! Routing for wireless mesh networks.
//!
//! Links are scored by a fuzzy Integrated Link Cost built from throughput,
//! delay and jitter; minimum-cost routes are then searched with Big
//! Bang–Big Crunch or biogeography-based optimization over a random-keys
//! path encoding, and checked against an exact shortest-path oracle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bbbc;
pub mod bbo;
pub mod bench;
pub mod error;
pub mod fuzzycost;
pub mod oracle;
pub mod pathcodec;
pub mod topology;
pub mod trace;

pub use bbbc::{run_bbbc, BbbcParams, CenterMode};
pub use bbo::{run_bbo, BboParams};
pub use bench::{run_plan, summarize, Algorithm, BenchPlan, OptimizerParams, RunResult, SeedPair};
pub use error::{Error, Result};
pub use fuzzycost::{
    build_cost_matrix, evaluate_ilc, CostMatrix, FuzzyCost, MetricBounds, RuleBase,
};
pub use oracle::{brute_force, percent_error, shortest_path, OracleResult};
pub use pathcodec::{decode, path_cost, random_vector, Path, PriorityVector};
pub use topology::{connectivity_matrix, generate_scenario, NetworkScenario, Placement};
pub use trace::{GenerationTrace, SearchResult};

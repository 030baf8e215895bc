//! Freshness-aware query routing between a processor-sharing sensor network
//! and a database serving aging data.
//!
//! Queries can be answered two ways: the sensor network computes a fresh
//! answer but makes the query wait (and slows everyone else down), while the
//! database answers instantly from stored data whose age grows until the
//! next report refreshes it. This crate finds and evaluates routing rules
//! for that trade-off:
//!
//! - [`model`] — the uniformized discrete-time Markov decision process on
//!   `(queries, reports, age phases)`: transition kernel, stage costs,
//!   truncation.
//! - [`solver`] — average-cost value iteration with Odoni bounds, ε-optimal
//!   policy extraction, CSV export, and a truncation diagnostic.
//! - [`heuristics`] — always-DB, always-WSN, and age-threshold rules with
//!   closed-form average costs where they exist.
//! - [`sim`] — a continuous-time discrete-event simulator (Poisson or
//!   trace-driven arrivals, real-valued age) used as ground truth.
//! - [`trace`] — arrival-log parsing, rate estimation, and a
//!   Markov-modulated Poisson generator for bursty synthetic workloads.
//! - [`cli`] — the `freshroute` command-line harness built on all of the
//!   above.
//!
//! The `examples/` directory drives each capability end to end; start with
//! `solve_policy` and `compare_policies`. The short version:
//!
//! ```
//! use freshroute::{Model, ModelParams, value_iteration, cost_always_wsn};
//!
//! let mut params = ModelParams::with_defaults(0.8, 0.5, 1.8, 1.0, 1.0);
//! params.i_max = 12;
//! params.j_max = 12;
//! params.n_max = 24;
//! let model = Model::new(params).unwrap();
//! let solved = value_iteration(&model, 1e-5, 100_000);
//! assert!(solved.converged);
//! // routing optimally beats pushing every query into the network
//! assert!(solved.g_time < cost_always_wsn(&model).unwrap());
//! ```

pub mod cli;
pub mod heuristics;
pub mod model;
pub mod sim;
pub mod solver;
pub mod trace;

pub use heuristics::{
    cost_always_db, cost_always_db_limit, cost_always_wsn, heuristic_policy, HeuristicKind,
    HeuristicPolicy,
};
pub use model::{Action, Model, ModelError, ModelParams, State};
pub use sim::{
    evaluate_policies, poisson_arrivals, simulate, AssignPolicy, ArrivalSource, PoissonArrivals,
    RepStats, SimConfig, SimError, SimReport, SimState, TraceArrivals,
};
pub use solver::{
    bellman_backup, odoni_bounds, value_iteration, value_iteration_with, BoundsTrace, Policy,
    SolveOptions, SolveResult, SolverError, ValueTable,
};
pub use trace::{
    counts_per_minute, estimate_rate, parse_trace, synth_bursty_trace, Trace, TraceError,
};

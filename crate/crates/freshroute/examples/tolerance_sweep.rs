//! Sweep the validity tolerance and write a plot-ready CSV: solver estimate,
//! closed forms, and simulated cost/utilization for all four policies per
//! grid point. The same data the `sweep --preset fig3` command produces.
//!
//! Run with: `cargo run --release --example tolerance_sweep [out.csv]`

use freshroute::heuristics::{cost_always_db, cost_always_wsn, heuristic_policy, HeuristicKind};
use freshroute::model::{Model, ModelParams};
use freshroute::sim::{evaluate_policies, poisson_arrivals, AssignPolicy, SimConfig};
use freshroute::solver::{value_iteration_with, SolveOptions};
use std::fmt::Write as _;

fn main() {
    let out_path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "tolerance_sweep.csv".to_string());
    let grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];

    let mut csv = String::from(
        "T,g_time,wsn_exact,db_exact,cost_opt,cost_db,cost_wsn,cost_threshold,util_opt\n",
    );
    println!(
        "{:>4} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "T", "g_time", "opt", "db", "wsn", "thr", "util_opt"
    );
    for tolerance in grid {
        let params = ModelParams::with_defaults(0.8, 0.5, 1.8, tolerance, 1.0);
        let model = Model::new(params.clone()).unwrap();
        let solved = value_iteration_with(
            &model,
            1e-6,
            100_000,
            &SolveOptions {
                boundary_diagnostic: false,
            },
        );
        let config = SimConfig {
            params,
            horizon: 100_000.0,
            warmup: 2_000.0,
            seed: 13,
            replications: 10,
        };
        let db = heuristic_policy(HeuristicKind::AlwaysDb, &model);
        let wsn = heuristic_policy(HeuristicKind::AlwaysWsn, &model);
        let thr = heuristic_policy(HeuristicKind::AgeThreshold, &model);
        let policies: Vec<&dyn AssignPolicy> = vec![&solved.policy, &db, &wsn, &thr];
        let arrivals = poisson_arrivals(0.8, config.seed).unwrap();
        let reports = evaluate_policies(&config, &policies, &arrivals).unwrap();

        println!(
            "{:>4} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.4}",
            tolerance,
            solved.g_time,
            reports[0].avg_cost_per_time,
            reports[1].avg_cost_per_time,
            reports[2].avg_cost_per_time,
            reports[3].avg_cost_per_time,
            reports[0].db_utilization,
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            tolerance,
            solved.g_time,
            cost_always_wsn(&model).unwrap(),
            cost_always_db(&model),
            reports[0].avg_cost_per_time,
            reports[1].avg_cost_per_time,
            reports[2].avg_cost_per_time,
            reports[3].avg_cost_per_time,
            reports[0].db_utilization,
        );
    }

    std::fs::write(&out_path, csv).unwrap();
    println!("\nwrote {out_path}");
}

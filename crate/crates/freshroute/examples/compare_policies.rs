//! Simulate the optimal policy against the three fixed heuristics on common
//! query-arrival streams and print the comparison table, alongside the
//! closed forms where they exist.
//!
//! Run with: `cargo run --release --example compare_policies`

use freshroute::heuristics::{
    cost_always_db, cost_always_db_limit, cost_always_wsn, heuristic_policy, HeuristicKind,
};
use freshroute::model::{Model, ModelParams};
use freshroute::sim::{evaluate_policies, poisson_arrivals, AssignPolicy, SimConfig};
use freshroute::solver::{value_iteration_with, SolveOptions};

fn main() {
    let tolerance = 1.0;
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
    println!(
        "solver: g = {:.5} per unit time ({} iterations)",
        solved.g_time, solved.iterations
    );
    println!(
        "closed forms: always-WSN {:.5}, always-DB {:.5} (phase age) / {:.5} (exponential age)\n",
        cost_always_wsn(&model).unwrap(),
        cost_always_db(&model),
        cost_always_db_limit(0.8, 0.5, tolerance),
    );

    let config = SimConfig {
        params,
        horizon: 200_000.0,
        warmup: 5_000.0,
        seed: 7,
        replications: 20,
    };
    let db = heuristic_policy(HeuristicKind::AlwaysDb, &model);
    let wsn = heuristic_policy(HeuristicKind::AlwaysWsn, &model);
    let thr = heuristic_policy(HeuristicKind::AgeThreshold, &model);
    let policies: Vec<&dyn AssignPolicy> = vec![&solved.policy, &db, &wsn, &thr];
    let arrivals = poisson_arrivals(0.8, config.seed).unwrap();
    let reports = evaluate_policies(&config, &policies, &arrivals).unwrap();

    println!(
        "{:<10} {:>10} {:>9} {:>9} {:>9}",
        "policy", "avg cost", "±95%", "db util", "sojourn"
    );
    for r in &reports {
        println!(
            "{:<10} {:>10.5} {:>9.5} {:>9.4} {:>9.4}",
            r.policy, r.avg_cost_per_time, r.avg_cost_ci, r.db_utilization, r.mean_query_sojourn
        );
    }
}

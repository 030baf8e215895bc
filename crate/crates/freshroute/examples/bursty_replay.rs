//! Generate a bursty (Markov-modulated Poisson) query trace, show its
//! per-minute arrival profile, and replay it under the optimal policy and
//! the heuristics. The cost advantage of the optimal policy survives
//! non-Poisson arrivals.
//!
//! Run with: `cargo run --release --example bursty_replay`

use freshroute::heuristics::{heuristic_policy, HeuristicKind};
use freshroute::model::{Model, ModelParams};
use freshroute::sim::{evaluate_policies, trace_arrivals, AssignPolicy, SimConfig};
use freshroute::solver::{value_iteration_with, SolveOptions};
use freshroute::trace::{counts_per_minute, estimate_rate, synth_bursty_trace};

fn main() {
    // busy periods ~25 queries/min, quiet ~5/min, regimes lasting ~20 min
    let trace = synth_bursty_trace(25.0 / 60.0, 5.0 / 60.0, 1.0 / 1200.0, 4.0 * 3600.0, 42)
        .unwrap()
        .rebased();
    let estimated = estimate_rate(&trace).unwrap();
    println!(
        "trace: {} arrivals over {:.0}s, estimated lambda1 = {:.4}/s",
        trace.count(),
        trace.span(),
        estimated
    );

    println!("\narrivals per minute:");
    let bins = counts_per_minute(&trace);
    for chunk in bins.chunks(60) {
        let bars: String = chunk
            .iter()
            .map(|(_, c)| match c {
                0..=2 => '.',
                3..=8 => '-',
                9..=15 => '=',
                _ => '#',
            })
            .collect();
        println!("  {bars}");
    }

    // report and service rates scaled so the load matches the reference system
    let scale = estimated / 0.8;
    let tolerance = 1.0;
    let params =
        ModelParams::with_defaults(estimated, 0.5 * scale, 1.8 * scale, tolerance, 1.0);
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
        "\nsolved at lambda2 = {:.4}, mu = {:.4}, T = {tolerance}: g = {:.4}",
        params.report_rate, params.service_rate, solved.g_time
    );

    let config = SimConfig {
        params,
        horizon: trace.span(),
        warmup: 0.0,
        seed: 17,
        replications: 20,
    };
    let db = heuristic_policy(HeuristicKind::AlwaysDb, &model);
    let wsn = heuristic_policy(HeuristicKind::AlwaysWsn, &model);
    let thr = heuristic_policy(HeuristicKind::AgeThreshold, &model);
    let policies: Vec<&dyn AssignPolicy> = vec![&solved.policy, &db, &wsn, &thr];
    let arrivals = trace_arrivals(&trace).unwrap();
    let reports = evaluate_policies(&config, &policies, &arrivals).unwrap();

    println!(
        "\n{:<10} {:>10} {:>9} {:>9}",
        "policy", "avg cost", "±95%", "db util"
    );
    for r in &reports {
        println!(
            "{:<10} {:>10.4} {:>9.4} {:>9.4}",
            r.policy, r.avg_cost_per_time, r.avg_cost_ci, r.db_utilization
        );
    }
}

//! The uniformization rate B is a modelling knob, not a physical parameter:
//! scaling it (with the age grid scaled to match) leaves the decision
//! structure essentially unchanged. This example solves at several
//! multipliers and reports the per-state agreement with the coarsest grid.
//!
//! Run with: `cargo run --release --example b_scaling`

use freshroute::model::{Model, ModelParams};
use freshroute::solver::{policy_agreement, value_iteration_with, SolveOptions};

fn main() {
    let base_age_cap = 62u32;
    let mut solved = Vec::new();
    for mult in [1u32, 2, 5, 10] {
        let mut params = ModelParams::with_defaults(0.8, 0.5, 1.8, 1.0, mult as f64);
        params.n_max = base_age_cap * mult;
        let model = Model::new(params).unwrap();
        let start = std::time::Instant::now();
        let result = value_iteration_with(
            &model,
            1e-3,
            100_000,
            &SolveOptions {
                boundary_diagnostic: false,
            },
        );
        println!(
            "B x{mult:<2} ({} states): g = {:.5}, {} iterations, {:.1}s",
            model.state_count,
            result.g_time,
            result.iterations,
            start.elapsed().as_secs_f64()
        );
        solved.push((mult, result.policy));
    }

    println!();
    let base = &solved[0].1;
    for (mult, policy) in &solved[1..] {
        let agreement = policy_agreement(base, policy, *mult);
        println!(
            "decisions at B x{mult} agree with B x1 on {:.3}% of states",
            agreement * 100.0
        );
    }
}

//! Solve for the optimal routing policy at the reference rates and look at
//! its structure: convergence trace, truncation diagnostic, and (i, j)
//! decision grids at a few age slices.
//!
//! Run with: `cargo run --release --example solve_policy`

use freshroute::cli::render_policy_slice;
use freshroute::model::{Model, ModelParams};
use freshroute::solver::value_iteration;

fn main() {
    let params = ModelParams::with_defaults(0.8, 0.5, 1.8, 1.0, 1.0);
    let model = Model::new(params).unwrap();
    println!(
        "grid ({}, {}, {}) = {} states, B = {}, T_ph = {}",
        model.params.i_max,
        model.params.j_max,
        model.params.n_max,
        model.state_count,
        model.params.uniformization_rate,
        model.tolerance_phases
    );

    let result = value_iteration(&model, 1e-6, 100_000);
    println!(
        "converged = {} after {} iterations, g = {:.6} per unit time",
        result.converged, result.iterations, result.g_time
    );
    println!(
        "boundary occupancy = {:.3e}",
        result.boundary_occupancy.unwrap()
    );

    println!("\nbound trace (every 30th iteration, per-time units):");
    let b = model.params.uniformization_rate;
    for (n, (lo, hi)) in result.bounds.0.iter().enumerate() {
        if n % 30 == 0 || n + 1 == result.bounds.0.len() {
            println!("  iter {:>4}: [{:.6}, {:.6}]", n + 1, lo * b, hi * b);
        }
    }

    // the decision boundary moves toward WSN as the data ages
    for age in [3, 6, 10, 20] {
        println!();
        println!("{}", render_policy_slice(&result.policy, age));
    }
}

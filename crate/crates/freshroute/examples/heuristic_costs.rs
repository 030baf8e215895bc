//! Closed-form heuristic costs across tolerances, and how the phase-age
//! always-DB form approaches its exponential-age limit as the
//! uniformization rate grows.
//!
//! Run with: `cargo run --release --example heuristic_costs`

use freshroute::heuristics::{cost_always_db, cost_always_db_limit, cost_always_wsn};
use freshroute::model::{Model, ModelParams};

fn main() {
    println!("reference rates: lambda1 = 0.8, lambda2 = 0.5, mu = 1.8\n");

    println!(
        "{:>4} {:>6} {:>16} {:>18}",
        "T", "T_ph", "always-DB (phase)", "always-DB (exp age)"
    );
    for tolerance in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let model = Model::new(ModelParams::with_defaults(0.8, 0.5, 1.8, tolerance, 1.0)).unwrap();
        println!(
            "{:>4} {:>6} {:>16.6} {:>18.6}",
            tolerance,
            model.tolerance_phases,
            cost_always_db(&model),
            cost_always_db_limit(0.8, 0.5, tolerance)
        );
    }

    let wsn = cost_always_wsn(
        &Model::new(ModelParams::with_defaults(0.8, 0.5, 1.8, 1.0, 1.0)).unwrap(),
    )
    .unwrap();
    println!("\nalways-WSN: {wsn} at every tolerance (mean queue length)\n");

    println!("phase-age form converging to the exponential-age limit (T = 1):");
    let limit = cost_always_db_limit(0.8, 0.5, 1.0);
    for mult in [1.0, 2.0, 5.0, 10.0, 100.0, 1000.0] {
        let model = Model::new(ModelParams::with_defaults(0.8, 0.5, 1.8, 1.0, mult)).unwrap();
        let value = cost_always_db(&model);
        println!(
            "  B x{:>5}: {:.6}  (rel gap {:+.4}%)",
            mult,
            value,
            (value - limit) / limit * 100.0
        );
    }
    println!("  limit:    {limit:.6}");
}

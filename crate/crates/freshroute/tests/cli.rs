//! End-to-end checks of the `freshroute` binary: exit codes, output files
//! re-parsed through the crate's own readers, and error paths.

use freshroute::cli::read_sweep_csv;
use freshroute::sim::read_results_csv;
use freshroute::solver::{BoundsTrace, Policy};
use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

fn freshroute(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freshroute"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_GRID: [&str; 6] = ["--imax", "10", "--jmax", "10", "--nmax", "20"];

#[test]
fn solve_writes_parseable_policy_and_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = freshroute(
        &[
            "solve", "--T", "1", "--eps", "1e-5", "--out", ".",
            "--imax", "10", "--jmax", "10", "--nmax", "20",
            "--grid-age", "8",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("g_time="), "missing summary: {stdout}");
    assert!(stdout.contains("boundary occupancy"), "missing diagnostic");
    assert!(stdout.contains("T_ph=3"), "missing phase tolerance");
    assert!(stdout.contains("decision grid at age phase N=8"));

    let policy =
        Policy::read_csv(BufReader::new(fs::File::open(tmp.path().join("policy.csv")).unwrap()))
            .unwrap();
    assert_eq!(policy.caps(), (10, 10, 20));
    let bounds =
        BoundsTrace::read_csv(BufReader::new(fs::File::open(tmp.path().join("bounds.csv")).unwrap()))
            .unwrap();
    assert!(!bounds.0.is_empty());
    for w in bounds.0.windows(2) {
        assert!(w[1].0 >= w[0].0 - 1e-12 && w[1].1 <= w[0].1 + 1e-12);
    }
}

#[test]
fn solve_compare_reports_agreement() {
    let tmp = tempfile::tempdir().unwrap();
    let out = freshroute(
        &[
            "solve", "--T", "1", "--eps", "1e-3", "--out", ".", "--compare", "1,2",
            "--no-occupancy", "--imax", "12", "--jmax", "12", "--nmax", "24",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("decision agreement at B-mult 2 vs 1"),
        "{stdout}"
    );
}

#[test]
fn unstable_parameters_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = freshroute(&["solve", "--lambda2", "2.0", "--mu", "1.8"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("stability violation"));
}

#[test]
fn nonconvergence_exits_3_unless_allowed() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["solve", "--T", "1", "--eps", "1e-9", "--max-iters", "3", "--out", "."];
    args.extend_from_slice(&SMALL_GRID);
    let out = freshroute(&args, tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("not converged"));
    // outputs still written for inspection
    assert!(tmp.path().join("bounds.csv").exists());

    let mut allowed = args.clone();
    allowed.push("--allow-nonconverged");
    let out = freshroute(&allowed, tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
}

#[test]
fn simulate_writes_results_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec![
        "simulate", "--policy", "wsn", "--horizon", "5000", "--warmup", "500", "--reps", "4",
        "--seed", "9", "--out", "results.csv",
    ];
    args.extend_from_slice(&SMALL_GRID);
    let out = freshroute(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let rows =
        read_results_csv(BufReader::new(fs::File::open(tmp.path().join("results.csv")).unwrap()))
            .unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].policy, "wsn");
    assert_eq!(rows[0].db_util, 0.0);
    assert!(rows[0].avg_cost > 0.0);

    // the optimal policy solves first, then simulates
    let mut args = vec![
        "simulate", "--policy", "opt", "--eps", "1e-3", "--horizon", "5000", "--warmup", "500",
        "--reps", "4", "--seed", "9", "--out", "opt.csv",
    ];
    args.extend_from_slice(&SMALL_GRID);
    let out = freshroute(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let opt_rows =
        read_results_csv(BufReader::new(fs::File::open(tmp.path().join("opt.csv")).unwrap()))
            .unwrap();
    assert_eq!(opt_rows[0].policy, "opt");
    assert!(opt_rows[0].avg_cost < rows[0].avg_cost);
}

#[test]
fn heuristics_prints_closed_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let out = freshroute(&["heuristics", "--T", "1"], tmp.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("always-WSN closed form"));
    assert!(stdout.contains("1.600000"));
    assert!(stdout.contains("0.791711"));
    assert!(stdout.contains("0.970449"));
}

#[test]
fn heuristics_reports_instability_without_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = freshroute(&["heuristics", "--lambda1", "1.5"], tmp.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("n/a"));
}

#[test]
fn sweep_rows_cover_the_grid_and_reparse() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep", "--axis", "T", "--values", "0,2", "--horizon", "3000", "--warmup", "300",
        "--reps", "2", "--seed", "4", "--eps", "1e-3", "--out", "sweep.csv",
    ];
    args.extend_from_slice(&SMALL_GRID);
    let out = freshroute(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let rows =
        read_sweep_csv(BufReader::new(fs::File::open(tmp.path().join("sweep.csv")).unwrap()))
            .unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].axis, "T");
    assert_eq!((rows[0].value, rows[1].value), (0.0, 2.0));
    for row in &rows {
        assert!(row.error.is_empty(), "unexpected error: {}", row.error);
        assert!(row.g_time.is_finite());
        assert!(row.db_exact.is_finite());
        // optimal never above the simulated heuristics by more than CI slack
        let (opt_cost, opt_ci, _, _) = row.policies[0];
        for (cost, ci, _, _) in &row.policies[1..] {
            assert!(opt_cost <= cost + ci + opt_ci + 1e-9);
        }
    }
}

#[test]
fn sweep_records_per_point_failures_and_continues() {
    let tmp = tempfile::tempdir().unwrap();
    // mu = 0.4 violates stability (λ2 = 0.5); mu = 1.8 is fine
    let mut args = vec![
        "sweep", "--axis", "mu", "--values", "0.4,1.8", "--horizon", "2000", "--warmup", "200",
        "--reps", "2", "--seed", "4", "--eps", "1e-3", "--out", "sweep.csv",
    ];
    args.extend_from_slice(&SMALL_GRID);
    let out = freshroute(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let rows =
        read_sweep_csv(BufReader::new(fs::File::open(tmp.path().join("sweep.csv")).unwrap()))
            .unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].error.contains("stability"));
    assert!(rows[0].g_time.is_nan());
    assert!(rows[1].error.is_empty());
}

#[test]
fn figure_presets_sweep_the_documented_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let quick = [
        "--horizon", "2000", "--warmup", "200", "--reps", "2", "--eps", "1e-3",
        "--imax", "10", "--jmax", "10",
    ];

    // query-rate sweep: exact always-DB/always-WSN costs grow with λ1
    let mut args = vec!["sweep", "--preset", "fig4", "--out", "fig4.csv", "--seed", "2"];
    args.extend_from_slice(&quick);
    let out = freshroute(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let rows =
        read_sweep_csv(BufReader::new(fs::File::open(tmp.path().join("fig4.csv")).unwrap()))
            .unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.axis == "lambda1" && r.error.is_empty()));
    for w in rows.windows(2) {
        assert!(w[1].db_exact > w[0].db_exact);
        assert!(w[1].wsn_exact > w[0].wsn_exact);
        assert!(w[1].g_time >= w[0].g_time - 1e-3);
    }

    // service-rate sweep: exact always-WSN cost falls as μ grows
    let mut args = vec!["sweep", "--preset", "fig5", "--out", "fig5.csv", "--seed", "2"];
    args.extend_from_slice(&quick);
    let out = freshroute(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let rows =
        read_sweep_csv(BufReader::new(fs::File::open(tmp.path().join("fig5.csv")).unwrap()))
            .unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.axis == "mu" && r.error.is_empty()));
    for w in rows.windows(2) {
        assert!(w[1].wsn_exact < w[0].wsn_exact);
        assert!(w[1].g_time <= w[0].g_time + 1e-3);
    }
}

#[test]
fn replay_estimates_rate_and_compares_policies() {
    let tmp = tempfile::tempdir().unwrap();
    // uniform arrivals: rate exactly 0.5
    let lines: String = (0..500).map(|k| format!("{}\n", k as f64 * 2.0)).collect();
    fs::write(tmp.path().join("trace.log"), lines).unwrap();
    let mut args = vec![
        "replay", "--trace", "trace.log", "--lambda2", "0.4", "--mu", "1.2", "--T", "2",
        "--reps", "2", "--seed", "6", "--eps", "1e-3", "--out", "replay.csv",
    ];
    args.extend_from_slice(&SMALL_GRID);
    let out = freshroute(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("estimated lambda1 = 0.5"), "{stdout}");
    let rows =
        read_results_csv(BufReader::new(fs::File::open(tmp.path().join("replay.csv")).unwrap()))
            .unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.policy.as_str()).collect();
    assert_eq!(names, ["opt", "db", "wsn", "threshold"]);
    assert_eq!(rows[0].query_rate, 0.5);
}

#[test]
fn replay_rejects_empty_and_corrupt_traces() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("empty.log"), "# nothing\n").unwrap();
    let out = freshroute(&["replay", "--trace", "empty.log"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("no timestamps"));

    fs::write(tmp.path().join("bad.log"), "1.0\n2.0\n1.5\n").unwrap();
    let out = freshroute(&["replay", "--trace", "bad.log"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("earlier than"));

    let out = freshroute(&["replay", "--trace", "missing.log"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = freshroute(&["solve", "--bogus"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nonpositive_eps_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in ["solve", "simulate", "sweep"] {
        let out = freshroute(&[cmd, "--eps", "0"], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{cmd} accepted --eps 0");
        assert!(stderr_of(&out).contains("--eps"));
    }
}

#[test]
fn presets_route_to_the_right_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = freshroute(&["sweep", "--preset", "fig2"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("belongs to `solve`"));

    let out = freshroute(&["solve", "--preset", "fig3"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("belongs to `sweep`"));

    let out = freshroute(&["sweep"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("--axis"));
}

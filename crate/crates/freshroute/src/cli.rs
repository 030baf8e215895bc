//! Command-line harness: `solve`, `simulate`, `replay`, `heuristics`, and
//! `sweep`.
//!
//! Exit codes: 0 on success, 2 on input/validation (or I/O) failure, 3 when
//! value iteration hits its iteration cap without converging and
//! `--allow-nonconverged` was not given. All CSV output is deterministic:
//! identical flags and seed reproduce byte-identical files.

use crate::heuristics::{
    cost_always_db, cost_always_db_limit, cost_always_wsn, heuristic_policy, HeuristicKind,
};
use crate::model::{default_age_cap, Action, Model, ModelParams};
use crate::sim::{
    evaluate_policies, poisson_arrivals, simulate, trace_arrivals, write_results_csv,
    AssignPolicy, SimConfig, SimReport,
};
use crate::solver::{value_iteration_with, policy_agreement, Policy, SolveOptions, SolveResult};
use crate::trace::{estimate_rate, parse_trace};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "freshroute",
    about = "Query routing between a sensor network and an aging database: \
             optimal policies, heuristics, simulation, and trace replay",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the optimal routing policy by average-cost value iteration
    Solve(SolveArgs),
    /// Simulate one policy against Poisson arrivals
    Simulate(SimulateArgs),
    /// Replay a recorded query trace under the optimal policy and all heuristics
    Replay(ReplayArgs),
    /// Print closed-form heuristic costs
    Heuristics(HeuristicsArgs),
    /// Solve, evaluate, and simulate across a parameter grid
    Sweep(SweepArgs),
}

/// Model parameters shared by every command.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Query arrival rate λ1
    #[arg(long, default_value_t = 0.8)]
    pub lambda1: f64,
    /// Report arrival rate λ2
    #[arg(long, default_value_t = 0.5)]
    pub lambda2: f64,
    /// Sensor-network service rate μ
    #[arg(long, default_value_t = 1.8)]
    pub mu: f64,
    /// Data-validity tolerance T in time units
    #[arg(long = "T", default_value_t = 1.0)]
    pub tolerance: f64,
    /// Uniformization rate multiplier: B = mult · (λ1 + λ2 + μ)
    #[arg(long = "B-mult", default_value_t = 1.0)]
    pub b_mult: f64,
    /// Truncation cap on queries
    #[arg(long, default_value_t = 40)]
    pub imax: u32,
    /// Truncation cap on reports
    #[arg(long, default_value_t = 40)]
    pub jmax: u32,
    /// Truncation cap on age phases [default: 10·B·max(T, 1/λ2), rounded up]
    #[arg(long)]
    pub nmax: Option<u32>,
}

impl ModelArgs {
    pub fn params(&self) -> ModelParams {
        let b = self.b_mult * (self.lambda1 + self.lambda2 + self.mu);
        ModelParams {
            query_rate: self.lambda1,
            report_rate: self.lambda2,
            service_rate: self.mu,
            tolerance: self.tolerance,
            uniformization_rate: b,
            i_max: self.imax,
            j_max: self.jmax,
            n_max: self
                .nmax
                .unwrap_or_else(|| default_age_cap(b, self.tolerance, self.lambda2)),
        }
    }
}

/// Simulation controls shared by the simulating commands.
#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Simulated time units per replication [default: 100000; replay: trace span]
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Warmup time excluded from statistics [default: 1000; replay: 0]
    #[arg(long)]
    pub warmup: Option<f64>,
    /// Independent replications
    #[arg(long, default_value_t = 20)]
    pub reps: u32,
    /// RNG seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl SimArgs {
    fn config(&self, params: ModelParams, default_horizon: f64, default_warmup: f64) -> SimConfig {
        SimConfig {
            params,
            horizon: self.horizon.unwrap_or(default_horizon),
            warmup: self.warmup.unwrap_or(default_warmup),
            seed: self.seed,
            replications: self.reps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyChoice {
    Opt,
    Db,
    Wsn,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Paper-scale optimal policy grid (solve)
    Fig2,
    /// Tolerance sweep at λ1=0.8, λ2=0.5, μ=1.8 (sweep)
    Fig3,
    /// Query-rate sweep at T=1 (sweep)
    Fig4,
    /// Service-rate sweep at T=1 (sweep)
    Fig5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    #[value(name = "T")]
    Tolerance,
    #[value(name = "lambda1")]
    Lambda1,
    #[value(name = "mu")]
    Mu,
    #[value(name = "Bmult")]
    BMult,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::Tolerance => "T",
            SweepAxis::Lambda1 => "lambda1",
            SweepAxis::Mu => "mu",
            SweepAxis::BMult => "Bmult",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Convergence tolerance ε on the average cost
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Iteration cap
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: u32,
    /// Output directory for policy.csv and bounds.csv
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Render the (i, j) decision grid at this age phase (repeatable)
    #[arg(long = "grid-age")]
    pub grid_age: Vec<u32>,
    /// Re-solve at these B multipliers and report decision agreement with
    /// the first (age caps scale along)
    #[arg(long, value_delimiter = ',')]
    pub compare: Vec<u32>,
    /// Exit 0 even if the bounds did not close within the iteration cap
    #[arg(long)]
    pub allow_nonconverged: bool,
    /// Skip the boundary-occupancy diagnostic (saves a stationary pass)
    #[arg(long)]
    pub no_occupancy: bool,
    /// Parameter preset (fig2)
    #[arg(long)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Which policy to simulate
    #[arg(long, value_enum, default_value_t = PolicyChoice::Opt)]
    pub policy: PolicyChoice,
    /// Convergence tolerance when solving for the optimal policy
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Write the results CSV here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Query-timestamp log to replay (one timestamp in seconds per line;
    /// λ1 is estimated from it and overrides --lambda1)
    #[arg(long)]
    pub trace: PathBuf,
    /// Convergence tolerance when solving for the optimal policy
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Write the comparison CSV here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeuristicsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Swept parameter
    #[arg(long, value_enum)]
    pub axis: Option<SweepAxis>,
    /// Grid values for the swept parameter
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    /// Figure preset overriding axis and values (fig3, fig4, fig5)
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Convergence tolerance for the per-point solves
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Iteration cap for the per-point solves
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: u32,
    /// Output CSV
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

/// CLI failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input, failed validation, or I/O trouble (exit 2).
    Validation(String),
    /// Value iteration hit the cap without closing the bounds (exit 3).
    NonConverged { iterations: u32, width: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConverged { .. } => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::NonConverged { iterations, width } => write!(
                f,
                "not converged after {iterations} iterations (bracket width {width:.3e}); \
                 rerun with --allow-nonconverged to accept"
            ),
        }
    }
}

fn invalid<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

fn check_eps(eps: f64) -> Result<(), CliError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "--eps must be positive and finite, got {eps}"
        )))
    }
}

/// Runs a parsed command.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Heuristics(args) => cmd_heuristics(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn paper_rates(model: &mut ModelArgs, tolerance: f64) {
    model.lambda1 = 0.8;
    model.lambda2 = 0.5;
    model.mu = 1.8;
    model.tolerance = tolerance;
}

// ── solve ───────────────────────────────────────────────────────────────────

fn cmd_solve(mut args: SolveArgs) -> Result<(), CliError> {
    check_eps(args.eps)?;
    match args.preset {
        None => {}
        Some(Preset::Fig2) => {
            paper_rates(&mut args.model, 1.0);
            if args.grid_age.is_empty() {
                args.grid_age = vec![4, 8, 16, 31];
            }
        }
        Some(other) => {
            return Err(CliError::Validation(format!(
                "preset {other:?} belongs to `sweep`; `solve` supports fig2"
            )))
        }
    }
    let model = Model::new(args.model.params()).map_err(invalid)?;
    println!(
        "model: lambda1={} lambda2={} mu={} T={} B={} grid=({},{},{})",
        model.params.query_rate,
        model.params.report_rate,
        model.params.service_rate,
        model.params.tolerance,
        model.params.uniformization_rate,
        model.params.i_max,
        model.params.j_max,
        model.params.n_max,
    );
    println!(
        "tolerance in phases: T_ph={} (rounding error {:.4})",
        model.tolerance_phases, model.tolerance_rounding_error
    );

    let options = SolveOptions {
        boundary_diagnostic: !args.no_occupancy,
    };
    let result = value_iteration_with(&model, args.eps, args.max_iters, &options);
    write_solve_outputs(&args.out, &result)?;
    print_solve_summary(&model, &result);

    for &age in &args.grid_age {
        println!();
        println!("{}", render_policy_slice(&result.policy, age));
    }

    if !args.compare.is_empty() {
        compare_multipliers(&args)?;
    }

    if !result.converged && !args.allow_nonconverged {
        let (lo, hi) = result.bounds.last().unwrap_or((0.0, 0.0));
        return Err(CliError::NonConverged {
            iterations: result.iterations,
            width: (hi - lo) * model.params.uniformization_rate,
        });
    }
    Ok(())
}

fn write_solve_outputs(dir: &Path, result: &SolveResult) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(invalid)?;
    let policy_path = dir.join("policy.csv");
    let bounds_path = dir.join("bounds.csv");
    let mut policy_file = io::BufWriter::new(fs::File::create(&policy_path).map_err(invalid)?);
    result.policy.write_csv(&mut policy_file).map_err(invalid)?;
    policy_file.flush().map_err(invalid)?;
    let mut bounds_file = io::BufWriter::new(fs::File::create(&bounds_path).map_err(invalid)?);
    result.bounds.write_csv(&mut bounds_file).map_err(invalid)?;
    bounds_file.flush().map_err(invalid)?;
    println!(
        "wrote {} and {}",
        policy_path.display(),
        bounds_path.display()
    );
    Ok(())
}

fn print_solve_summary(model: &Model, result: &SolveResult) {
    let (lo, hi) = result.bounds.last().unwrap_or((0.0, 0.0));
    let b = model.params.uniformization_rate;
    println!(
        "g_time={:.6} (per step {:.6e}), bracket [{:.6}, {:.6}] per time, iterations={}, converged={}",
        result.g_time,
        result.g_step,
        lo * b,
        hi * b,
        result.iterations,
        result.converged,
    );
    match result.boundary_occupancy {
        Some(occ) => println!("boundary occupancy: {occ:.3e} (stationary mass at truncation caps)"),
        None => println!("boundary occupancy: skipped"),
    }
}

/// Text rendering of the (i, j) decision grid at one age slice: `W` marks
/// WSN routing, `.` marks DB.
pub fn render_policy_slice(policy: &Policy, age_phases: u32) -> String {
    let (i_max, j_max, n_max) = policy.caps();
    let age = age_phases.min(n_max);
    let mut out = String::new();
    let _ = writeln!(out, "decision grid at age phase N={age} (rows i, cols j; W=WSN, .=DB)");
    for i in (0..=i_max).rev() {
        let _ = write!(out, "{i:>3} ");
        for j in 0..=j_max {
            let c = match policy.lookup(i, j, age) {
                Action::Wsn => 'W',
                Action::Db => '.',
            };
            out.push(c);
        }
        out.push('\n');
    }
    let _ = write!(out, "    ");
    for j in 0..=j_max {
        let _ = write!(out, "{}", j % 10);
    }
    out
}

fn compare_multipliers(args: &SolveArgs) -> Result<(), CliError> {
    let mults = &args.compare;
    let base_mult = mults[0];
    if base_mult == 0 {
        return Err(CliError::Validation("compare multipliers must be >= 1".into()));
    }
    // age cap at multiplier 1, scaled along with B so phases stay aligned
    let unit_cap = args.model.nmax.unwrap_or_else(|| {
        let rate_sum = args.model.lambda1 + args.model.lambda2 + args.model.mu;
        default_age_cap(rate_sum, args.model.tolerance, args.model.lambda2)
    });
    let mut solved: Vec<(u32, Policy)> = Vec::new();
    for &m in mults {
        if m % base_mult != 0 {
            return Err(CliError::Validation(format!(
                "compare multiplier {m} is not a multiple of {base_mult}; \
                 age grids cannot be aligned"
            )));
        }
        let mut margs = args.model.clone();
        margs.b_mult = m as f64;
        margs.nmax = Some(unit_cap * m);
        let model = Model::new(margs.params()).map_err(invalid)?;
        let result = value_iteration_with(
            &model,
            args.eps,
            args.max_iters,
            &SolveOptions {
                boundary_diagnostic: false,
            },
        );
        println!(
            "B-mult {m}: g_time={:.6}, iterations={}, converged={}",
            result.g_time, result.iterations, result.converged
        );
        solved.push((m, result.policy));
    }
    let (_, base_policy) = &solved[0];
    for (m, policy) in &solved[1..] {
        let agreement = policy_agreement(base_policy, policy, m / base_mult);
        println!(
            "decision agreement at B-mult {m} vs {base_mult}: {:.4}%",
            agreement * 100.0
        );
    }
    Ok(())
}

// ── simulate ────────────────────────────────────────────────────────────────

fn solve_policy_for(model: &Model, eps: f64) -> Result<Policy, CliError> {
    let result = value_iteration_with(
        model,
        eps,
        100_000,
        &SolveOptions {
            boundary_diagnostic: false,
        },
    );
    if !result.converged {
        let (lo, hi) = result.bounds.last().unwrap_or((0.0, 0.0));
        return Err(CliError::NonConverged {
            iterations: result.iterations,
            width: (hi - lo) * model.params.uniformization_rate,
        });
    }
    Ok(result.policy)
}

fn print_report_table(reports: &[SimReport]) {
    println!(
        "{:<10} {:>12} {:>10} {:>9} {:>9} {:>10}",
        "policy", "avg_cost", "±95%", "db_util", "±95%", "sojourn"
    );
    for r in reports {
        println!(
            "{:<10} {:>12.5} {:>10.5} {:>9.4} {:>9.4} {:>10.4}",
            r.policy,
            r.avg_cost_per_time,
            r.avg_cost_ci,
            r.db_utilization,
            r.db_utilization_ci,
            r.mean_query_sojourn,
        );
    }
}

fn write_results(
    out: &Option<PathBuf>,
    params: &ModelParams,
    reports: &[SimReport],
) -> Result<(), CliError> {
    if let Some(path) = out {
        let mut file = io::BufWriter::new(fs::File::create(path).map_err(invalid)?);
        write_results_csv(&mut file, params, reports).map_err(invalid)?;
        file.flush().map_err(invalid)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    check_eps(args.eps)?;
    let model = Model::new(args.model.params()).map_err(invalid)?;
    let config = args.sim.config(model.params.clone(), 100_000.0, 1_000.0);
    let arrivals = poisson_arrivals(model.params.query_rate, config.seed).map_err(invalid)?;

    let solved;
    let heuristic;
    let policy: &dyn AssignPolicy = match args.policy {
        PolicyChoice::Opt => {
            solved = solve_policy_for(&model, args.eps)?;
            &solved
        }
        PolicyChoice::Db => {
            heuristic = heuristic_policy(HeuristicKind::AlwaysDb, &model);
            &heuristic
        }
        PolicyChoice::Wsn => {
            heuristic = heuristic_policy(HeuristicKind::AlwaysWsn, &model);
            &heuristic
        }
        PolicyChoice::Threshold => {
            heuristic = heuristic_policy(HeuristicKind::AgeThreshold, &model);
            &heuristic
        }
    };

    let report = simulate(&config, policy, &arrivals).map_err(invalid)?;
    print_report_table(std::slice::from_ref(&report));
    write_results(&args.out, &model.params, std::slice::from_ref(&report))
}

// ── replay ──────────────────────────────────────────────────────────────────

fn cmd_replay(args: ReplayArgs) -> Result<(), CliError> {
    check_eps(args.eps)?;
    let file = fs::File::open(&args.trace)
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.trace.display())))?;
    let trace = parse_trace(BufReader::new(file)).map_err(invalid)?;
    let trace = trace.rebased();
    let estimated = estimate_rate(&trace).map_err(invalid)?;
    println!(
        "trace: {} arrivals over {:.1}s, estimated lambda1 = {:.6}",
        trace.count(),
        trace.span(),
        estimated
    );

    let mut margs = args.model.clone();
    margs.lambda1 = estimated;
    let model = Model::new(margs.params()).map_err(invalid)?;
    let config = args.sim.config(model.params.clone(), trace.span(), 0.0);

    let opt = solve_policy_for(&model, args.eps)?;
    let db = heuristic_policy(HeuristicKind::AlwaysDb, &model);
    let wsn = heuristic_policy(HeuristicKind::AlwaysWsn, &model);
    let thr = heuristic_policy(HeuristicKind::AgeThreshold, &model);
    let policies: Vec<&dyn AssignPolicy> = vec![&opt, &db, &wsn, &thr];

    let arrivals = trace_arrivals(&trace).map_err(invalid)?;
    let reports = evaluate_policies(&config, &policies, &arrivals).map_err(invalid)?;
    print_report_table(&reports);
    write_results(&args.out, &model.params, &reports)
}

// ── heuristics ──────────────────────────────────────────────────────────────

fn cmd_heuristics(args: HeuristicsArgs) -> Result<(), CliError> {
    let model = Model::new(args.model.params()).map_err(invalid)?;
    let p = &model.params;
    println!(
        "rates: lambda1={} lambda2={} mu={} T={} (T_ph={}, rounding error {:.4})",
        p.query_rate,
        p.report_rate,
        p.service_rate,
        p.tolerance,
        model.tolerance_phases,
        model.tolerance_rounding_error
    );
    match cost_always_wsn(&model) {
        Ok(c) => println!("always-WSN closed form:            {c:.6}"),
        Err(e) => println!("always-WSN closed form:            n/a ({e})"),
    }
    println!(
        "always-DB closed form (phase age): {:.6}",
        cost_always_db(&model)
    );
    println!(
        "always-DB exponential-age limit:   {:.6}",
        cost_always_db_limit(p.query_rate, p.report_rate, p.tolerance)
    );
    println!("age-threshold: no closed form; use `simulate --policy threshold`");
    Ok(())
}

// ── sweep ───────────────────────────────────────────────────────────────────

pub const SWEEP_HEADER: &str = "axis,value,T,lambda1,lambda2,mu,B,g_time,wsn_exact,db_exact,\
cost_opt,cost_ci_opt,util_opt,util_ci_opt,cost_db,cost_ci_db,util_db,util_ci_db,\
cost_wsn,cost_ci_wsn,util_wsn,util_ci_wsn,cost_threshold,cost_ci_threshold,\
util_threshold,util_ci_threshold,error";

/// One parsed row of a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub tolerance: f64,
    pub query_rate: f64,
    pub report_rate: f64,
    pub service_rate: f64,
    pub uniformization_rate: f64,
    pub g_time: f64,
    pub wsn_exact: f64,
    pub db_exact: f64,
    /// Simulated (cost, cost_ci, util, util_ci) for opt, db, wsn, threshold.
    pub policies: [(f64, f64, f64, f64); 4],
    pub error: String,
}

pub fn read_sweep_csv<R: BufRead>(r: R) -> io::Result<Vec<SweepRow>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == SWEEP_HEADER => {}
        other => return Err(bad(format!("bad sweep header: {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 27 {
            return Err(bad(format!("bad sweep row ({} fields): {line}", f.len())));
        }
        let num = |s: &str| -> io::Result<f64> {
            s.parse::<f64>().map_err(|e| bad(format!("{e} in `{line}`")))
        };
        let mut policies = [(0.0, 0.0, 0.0, 0.0); 4];
        for (k, p) in policies.iter_mut().enumerate() {
            let base = 10 + 4 * k;
            *p = (
                num(f[base])?,
                num(f[base + 1])?,
                num(f[base + 2])?,
                num(f[base + 3])?,
            );
        }
        rows.push(SweepRow {
            axis: f[0].to_string(),
            value: num(f[1])?,
            tolerance: num(f[2])?,
            query_rate: num(f[3])?,
            report_rate: num(f[4])?,
            service_rate: num(f[5])?,
            uniformization_rate: num(f[6])?,
            g_time: num(f[7])?,
            wsn_exact: num(f[8])?,
            db_exact: num(f[9])?,
            policies,
            error: f[26].to_string(),
        });
    }
    Ok(rows)
}

struct SweepPoint {
    params: ModelParams,
    g_time: f64,
    wsn_exact: f64,
    db_exact: f64,
    reports: Vec<SimReport>,
}

fn sweep_point(args: &SweepArgs, axis: SweepAxis, value: f64) -> Result<SweepPoint, CliError> {
    let mut margs = args.model.clone();
    match axis {
        SweepAxis::Tolerance => margs.tolerance = value,
        SweepAxis::Lambda1 => margs.lambda1 = value,
        SweepAxis::Mu => margs.mu = value,
        SweepAxis::BMult => margs.b_mult = value,
    }
    let model = Model::new(margs.params()).map_err(invalid)?;
    let result = value_iteration_with(
        &model,
        args.eps,
        args.max_iters,
        &SolveOptions {
            boundary_diagnostic: false,
        },
    );
    if !result.converged {
        let (lo, hi) = result.bounds.last().unwrap_or((0.0, 0.0));
        return Err(CliError::NonConverged {
            iterations: result.iterations,
            width: (hi - lo) * model.params.uniformization_rate,
        });
    }

    let config = args.sim.config(model.params.clone(), 100_000.0, 1_000.0);
    let arrivals = poisson_arrivals(model.params.query_rate, config.seed).map_err(invalid)?;
    let db = heuristic_policy(HeuristicKind::AlwaysDb, &model);
    let wsn = heuristic_policy(HeuristicKind::AlwaysWsn, &model);
    let thr = heuristic_policy(HeuristicKind::AgeThreshold, &model);
    let policies: Vec<&dyn AssignPolicy> = vec![&result.policy, &db, &wsn, &thr];
    let reports = evaluate_policies(&config, &policies, &arrivals).map_err(invalid)?;

    Ok(SweepPoint {
        wsn_exact: cost_always_wsn(&model).unwrap_or(f64::NAN),
        db_exact: cost_always_db(&model),
        g_time: result.g_time,
        params: model.params.clone(),
        reports,
    })
}

fn cmd_sweep(mut args: SweepArgs) -> Result<(), CliError> {
    check_eps(args.eps)?;
    let (axis, values): (SweepAxis, Vec<f64>) = match args.preset {
        Some(Preset::Fig3) => {
            paper_rates(&mut args.model, 1.0);
            (SweepAxis::Tolerance, vec![0.0, 1.0, 2.0, 4.0, 8.0])
        }
        Some(Preset::Fig4) => {
            paper_rates(&mut args.model, 1.0);
            (SweepAxis::Lambda1, vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2])
        }
        Some(Preset::Fig5) => {
            paper_rates(&mut args.model, 1.0);
            (SweepAxis::Mu, vec![1.4, 1.6, 1.8, 2.2, 2.6, 3.0])
        }
        Some(Preset::Fig2) => {
            return Err(CliError::Validation(
                "preset fig2 belongs to `solve`; `sweep` supports fig3, fig4, fig5".into(),
            ))
        }
        None => {
            let axis = args.axis.ok_or_else(|| {
                CliError::Validation("need --axis and --values (or --preset)".into())
            })?;
            if args.values.is_empty() {
                return Err(CliError::Validation("need at least one --values entry".into()));
            }
            (axis, args.values.clone())
        }
    };

    let mut out = String::new();
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for &value in &values {
        print!("{} = {value}: ", axis.name());
        io::stdout().flush().ok();
        match sweep_point(&args, axis, value) {
            Ok(point) => {
                let p = &point.params;
                let _ = write!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    axis.name(),
                    value,
                    p.tolerance,
                    p.query_rate,
                    p.report_rate,
                    p.service_rate,
                    p.uniformization_rate,
                    point.g_time,
                    point.wsn_exact,
                    point.db_exact,
                );
                for r in &point.reports {
                    let _ = write!(
                        out,
                        ",{},{},{},{}",
                        r.avg_cost_per_time, r.avg_cost_ci, r.db_utilization, r.db_utilization_ci
                    );
                }
                let _ = writeln!(out, ",");
                println!(
                    "g_time={:.5}, opt sim {:.5} ± {:.5}",
                    point.g_time, point.reports[0].avg_cost_per_time, point.reports[0].avg_cost_ci
                );
            }
            Err(e) => {
                let msg = e.to_string().replace(',', ";").replace('\n', " ");
                let _ = write!(out, "{},{}", axis.name(), value);
                for _ in 0..24 {
                    let _ = write!(out, ",nan");
                }
                let _ = writeln!(out, ",{msg}");
                println!("failed: {e}");
            }
        }
    }

    fs::write(&args.out, out).map_err(invalid)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rows_round_trip() {
        let mut csv = String::new();
        csv.push_str(SWEEP_HEADER);
        csv.push('\n');
        csv.push_str("T,1,1,0.8,0.5,1.8,3.1,0.37,1.6,0.79");
        for _ in 0..16 {
            csv.push_str(",0.5");
        }
        csv.push_str(",\n");
        let rows = read_sweep_csv(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].axis, "T");
        assert_eq!(rows[0].g_time, 0.37);
        assert_eq!(rows[0].policies[3], (0.5, 0.5, 0.5, 0.5));
        assert_eq!(rows[0].error, "");
    }

    #[test]
    fn error_rows_parse_with_nan_fields() {
        let mut csv = String::new();
        csv.push_str(SWEEP_HEADER);
        csv.push('\n');
        csv.push_str("mu,1.2");
        for _ in 0..24 {
            csv.push_str(",nan");
        }
        csv.push_str(",stability violation\n");
        let rows = read_sweep_csv(csv.as_bytes()).unwrap();
        assert!(rows[0].g_time.is_nan());
        assert_eq!(rows[0].error, "stability violation");
    }

    #[test]
    fn cli_parses_reference_invocation() {
        let cli = Cli::try_parse_from([
            "freshroute", "solve", "--lambda1", "0.8", "--T", "2", "--B-mult", "2",
            "--grid-age", "5", "--compare", "1,2",
        ])
        .unwrap();
        match cli.command {
            Command::Solve(args) => {
                assert_eq!(args.model.tolerance, 2.0);
                assert_eq!(args.model.b_mult, 2.0);
                assert_eq!(args.compare, vec![1, 2]);
            }
            _ => panic!("wrong command"),
        }
    }
}

//! Continuous-time discrete-event simulation of the routing system.
//!
//! This is the numerical ground truth the solver and the closed forms are
//! validated against. Queries arrive from a [`ArrivalSource`] (Poisson or a
//! replayed trace), reports arrive Poisson(λ2), and the network serves under
//! processor sharing: one exponential clock at total rate μ whenever jobs
//! are present, with the completed job a query with probability `i/(i+j)`
//! and a report otherwise — exactly the per-class rates `μ·i/(i+j)` and
//! `μ·j/(i+j)`. The data age is real-valued, grows at slope one, and resets
//! to zero on every report completion.
//!
//! On a query arrival the policy routes it: DB answers instantly and accrues
//! the stale penalty `(age − T)⁺` at the arrival instant; WSN increments the
//! query count. Holding cost accrues as `∫ i dt`. Policies that want the
//! discrete age see `⌊age · B⌋` phases.
//!
//! Replications use independent RNG substreams and identical query-arrival
//! streams across policies (common random numbers), with report/service
//! randomness drawn per policy. Everything is deterministic per seed.

use crate::heuristics::HeuristicPolicy;
use crate::model::{Action, ModelParams};
use crate::solver::Policy;
use crate::trace::Trace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("arrival source is empty")]
    EmptyTrace,
    #[error("arrival stream moved backwards: {value} after {previous}")]
    NonMonotoneTrace { value: f64, previous: f64 },
    #[error("arrival rate must be positive, got {0}")]
    NonPositiveRate(f64),
}

/// A routing rule the simulator can drive.
pub trait AssignPolicy {
    fn assign(&self, i: u32, j: u32, age_phases: u32) -> Action;
    /// Short name used in report rows.
    fn label(&self) -> &str;
}

impl AssignPolicy for Policy {
    fn assign(&self, i: u32, j: u32, age_phases: u32) -> Action {
        self.lookup(i, j, age_phases)
    }

    fn label(&self) -> &str {
        "opt"
    }
}

impl AssignPolicy for HeuristicPolicy {
    fn assign(&self, i: u32, j: u32, age_phases: u32) -> Action {
        HeuristicPolicy::assign(self, i, j, age_phases)
    }

    fn label(&self) -> &str {
        self.kind.name()
    }
}

/// Where queries come from. `stream(r)` yields the absolute arrival times of
/// replication `r`; sources must be reusable so several policies can consume
/// identical streams.
pub trait ArrivalSource {
    fn stream(&self, replication: u32) -> Box<dyn Iterator<Item = f64> + '_>;
}

/// Poisson query arrivals at a fixed rate, deterministic per seed and
/// replication.
#[derive(Debug, Clone)]
pub struct PoissonArrivals {
    rate: f64,
    seed: u64,
}

/// Builds a Poisson arrival source.
pub fn poisson_arrivals(rate: f64, seed: u64) -> Result<PoissonArrivals, SimError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(SimError::NonPositiveRate(rate));
    }
    Ok(PoissonArrivals { rate, seed })
}

impl ArrivalSource for PoissonArrivals {
    fn stream(&self, replication: u32) -> Box<dyn Iterator<Item = f64> + '_> {
        let mut rng = substream(self.seed, STREAM_ARRIVALS, replication as u64, 0);
        let exp = Exp::new(self.rate).expect("positive rate");
        let mut clock = 0.0;
        Box::new(std::iter::repeat_with(move || {
            clock += exp.sample(&mut rng);
            clock
        }))
    }
}

/// Replays a recorded trace; every replication sees the same arrivals.
#[derive(Debug, Clone)]
pub struct TraceArrivals<'a> {
    trace: &'a Trace,
}

impl<'a> TraceArrivals<'a> {
    pub fn new(trace: &'a Trace) -> Self {
        Self { trace }
    }
}

impl ArrivalSource for TraceArrivals<'_> {
    fn stream(&self, _replication: u32) -> Box<dyn Iterator<Item = f64> + '_> {
        Box::new(self.trace.timestamps().iter().copied())
    }
}

/// Simulation horizon, warmup, seeding, and replication count. The model
/// parameters supply λ2, μ, T; `B` is used only to discretize the age for
/// policy lookups.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Simulated time units per replication.
    pub horizon: f64,
    /// Leading time excluded from statistics.
    pub warmup: f64,
    pub seed: u64,
    pub replications: u32,
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.warmup >= 0.0 && self.horizon > self.warmup) {
            return Err(SimError::InvalidConfig(format!(
                "need horizon > warmup >= 0, got horizon {} warmup {}",
                self.horizon, self.warmup
            )));
        }
        if self.replications < 1 {
            return Err(SimError::InvalidConfig("need at least one replication".into()));
        }
        for (what, v) in [
            ("report rate", self.params.report_rate),
            ("service rate", self.params.service_rate),
            ("uniformization rate", self.params.uniformization_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::InvalidConfig(format!("{what} must be positive, got {v}")));
            }
        }
        if self.params.tolerance.is_nan() || self.params.tolerance < 0.0 {
            return Err(SimError::InvalidConfig("tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Live simulator state: job counts, the real-valued age bookkeeping, and
/// the clock. The age at any instant is `clock − last_reset`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimState {
    /// Queries in the network.
    pub i: u32,
    /// Reports in the network.
    pub j: u32,
    /// Current simulated time.
    pub clock: f64,
    /// Time of the last report completion.
    pub last_reset: f64,
}

impl SimState {
    pub fn age(&self) -> f64 {
        self.clock - self.last_reset
    }
}

/// Statistics of a single replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepStats {
    /// `(∫ i dt + Σ penalties) / (horizon − warmup)`.
    pub avg_cost: f64,
    /// Fraction of counted arrivals routed to the DB.
    pub db_utilization: f64,
    /// Mean sojourn of WSN-routed queries completed after warmup.
    pub mean_sojourn: f64,
}

/// Aggregated simulation outcome with 95% Student-t confidence half-widths
/// over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub policy: String,
    pub avg_cost_per_time: f64,
    pub avg_cost_ci: f64,
    pub db_utilization: f64,
    pub db_utilization_ci: f64,
    pub mean_query_sojourn: f64,
    pub mean_sojourn_ci: f64,
    pub replications: Vec<RepStats>,
}

const STREAM_ARRIVALS: u64 = 0xA11;
const STREAM_SERVICE: u64 = 0x5E7;

/// Independent ChaCha substream keyed by (seed, tag, a, b).
fn substream(seed: u64, tag: u64, a: u64, b: u64) -> ChaCha12Rng {
    let mut x = seed
        ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ a.wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ b.wrapping_mul(0x94D0_49BB_1331_11EB);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        // splitmix64 step
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        chunk.copy_from_slice((z ^ (z >> 31)).to_le_bytes().as_slice());
    }
    ChaCha12Rng::from_seed(key)
}

fn run_replication(
    config: &SimConfig,
    policy: &dyn AssignPolicy,
    mut arrivals: Box<dyn Iterator<Item = f64> + '_>,
    mut rng: impl Rng,
) -> Result<RepStats, SimError> {
    let report_rate = config.params.report_rate;
    let service_rate = config.params.service_rate;
    let tolerance = config.params.tolerance;
    let b = config.params.uniformization_rate;
    let horizon = config.horizon;
    let warmup = config.warmup;
    let unit_exp = Exp::new(1.0).expect("unit rate");

    // empty system with fresh data at time zero
    let mut s = SimState::default();
    // arrival times of queries currently in the network
    let mut in_service: Vec<f64> = Vec::new();

    let mut holding = 0.0f64;
    let mut penalties = 0.0f64;
    let mut db_count: u64 = 0;
    let mut wsn_count: u64 = 0;
    let mut sojourn_sum = 0.0f64;
    let mut sojourn_count: u64 = 0;

    let mut next_query = arrivals.next();
    if let Some(t) = next_query {
        if t < 0.0 {
            return Err(SimError::NonMonotoneTrace {
                value: t,
                previous: 0.0,
            });
        }
    }

    loop {
        // accumulate ∫ i dt over [clock, to] ∩ [warmup, horizon]
        let mut advance = |from: f64, to: f64, jobs: u32| {
            let lo = from.max(warmup);
            let hi = to.min(horizon);
            if hi > lo {
                holding += jobs as f64 * (hi - lo);
            }
        };

        let busy = s.i + s.j > 0;
        let internal_rate = report_rate + if busy { service_rate } else { 0.0 };
        let t_internal = s.clock + unit_exp.sample(&mut rng) / internal_rate;

        let query_first = match next_query {
            Some(tq) => tq <= t_internal,
            None => false,
        };

        if query_first {
            let tq = next_query.unwrap();
            if tq < s.clock {
                return Err(SimError::NonMonotoneTrace {
                    value: tq,
                    previous: s.clock,
                });
            }
            if tq >= horizon {
                advance(s.clock, horizon, s.i);
                break;
            }
            advance(s.clock, tq, s.i);
            s.clock = tq;
            // penalty uses the age at the arrival instant
            let age = s.age();
            let phases = (age * b).floor().min(u32::MAX as f64) as u32;
            let counted = s.clock >= warmup;
            match policy.assign(s.i, s.j, phases) {
                Action::Db => {
                    if counted {
                        penalties += (age - tolerance).max(0.0);
                        db_count += 1;
                    }
                }
                Action::Wsn => {
                    s.i += 1;
                    in_service.push(s.clock);
                    if counted {
                        wsn_count += 1;
                    }
                }
            }
            next_query = arrivals.next();
        } else {
            if t_internal >= horizon {
                advance(s.clock, horizon, s.i);
                break;
            }
            advance(s.clock, t_internal, s.i);
            s.clock = t_internal;
            let pick: f64 = rng.random::<f64>() * internal_rate;
            if pick < report_rate {
                s.j += 1;
            } else {
                // a completion; the finished job is a query w.p. i/(i+j)
                let query_share = s.i as f64 / (s.i + s.j) as f64;
                if rng.random::<f64>() < query_share {
                    let slot = rng.random_range(0..in_service.len());
                    let arrived = in_service.swap_remove(slot);
                    if s.clock >= warmup {
                        sojourn_sum += s.clock - arrived;
                        sojourn_count += 1;
                    }
                    s.i -= 1;
                } else {
                    s.j -= 1;
                    s.last_reset = s.clock;
                }
            }
        }
    }

    let elapsed = horizon - warmup;
    let assigned = db_count + wsn_count;
    Ok(RepStats {
        avg_cost: (holding + penalties) / elapsed,
        db_utilization: if assigned > 0 {
            db_count as f64 / assigned as f64
        } else {
            0.0
        },
        mean_sojourn: if sojourn_count > 0 {
            sojourn_sum / sojourn_count as f64
        } else {
            0.0
        },
    })
}

fn mean_and_ci(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid dof")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

fn aggregate(policy: &str, replications: Vec<RepStats>) -> SimReport {
    let n = replications.len();
    let (avg_cost_per_time, avg_cost_ci) =
        mean_and_ci(replications.iter().map(|r| r.avg_cost), n);
    let (db_utilization, db_utilization_ci) =
        mean_and_ci(replications.iter().map(|r| r.db_utilization), n);
    let (mean_query_sojourn, mean_sojourn_ci) =
        mean_and_ci(replications.iter().map(|r| r.mean_sojourn), n);
    SimReport {
        policy: policy.to_string(),
        avg_cost_per_time,
        avg_cost_ci,
        db_utilization,
        db_utilization_ci,
        mean_query_sojourn,
        mean_sojourn_ci,
        replications,
    }
}

fn simulate_salted(
    config: &SimConfig,
    policy: &dyn AssignPolicy,
    arrivals: &dyn ArrivalSource,
    salt: u64,
) -> Result<SimReport, SimError> {
    config.validate()?;
    let mut reps = Vec::with_capacity(config.replications as usize);
    for rep in 0..config.replications {
        let stream = arrivals.stream(rep);
        let rng = substream(config.seed, STREAM_SERVICE, rep as u64, salt);
        reps.push(run_replication(config, policy, stream, rng)?);
    }
    Ok(aggregate(policy.label(), reps))
}

/// Simulates one policy. Bit-identical results for identical config and
/// seed.
pub fn simulate(
    config: &SimConfig,
    policy: &dyn AssignPolicy,
    arrivals: &dyn ArrivalSource,
) -> Result<SimReport, SimError> {
    simulate_salted(config, policy, arrivals, 0)
}

/// Simulates several policies on identical query-arrival streams (common
/// random numbers); report/service randomness is drawn independently per
/// policy.
pub fn evaluate_policies(
    config: &SimConfig,
    policies: &[&dyn AssignPolicy],
    arrivals: &dyn ArrivalSource,
) -> Result<Vec<SimReport>, SimError> {
    if policies.is_empty() {
        return Err(SimError::InvalidConfig("need at least one policy".into()));
    }
    policies
        .iter()
        .enumerate()
        .map(|(k, policy)| simulate_salted(config, *policy, arrivals, k as u64 + 1))
        .collect()
}

/// Validates a trace as an arrival source (the parser already guarantees
/// monotonicity; this catches empty synthetic traces).
pub fn trace_arrivals(trace: &Trace) -> Result<TraceArrivals<'_>, SimError> {
    if trace.count() == 0 {
        return Err(SimError::EmptyTrace);
    }
    Ok(TraceArrivals::new(trace))
}

// ── results CSV ─────────────────────────────────────────────────────────────

/// One row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub policy: String,
    pub tolerance: f64,
    pub query_rate: f64,
    pub report_rate: f64,
    pub service_rate: f64,
    pub avg_cost: f64,
    pub avg_cost_ci: f64,
    pub db_util: f64,
    pub db_util_ci: f64,
    pub mean_sojourn: f64,
}

pub const RESULTS_HEADER: &str =
    "policy,T,lambda1,lambda2,mu,avg_cost,avg_cost_ci,db_util,db_util_ci,mean_sojourn";

/// Writes simulation reports as the results CSV.
pub fn write_results_csv<W: Write>(
    mut w: W,
    params: &ModelParams,
    reports: &[SimReport],
) -> io::Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.policy,
            params.tolerance,
            params.query_rate,
            params.report_rate,
            params.service_rate,
            r.avg_cost_per_time,
            r.avg_cost_ci,
            r.db_utilization,
            r.db_utilization_ci,
            r.mean_query_sojourn,
        )?;
    }
    Ok(())
}

/// Reads a results CSV written by [`write_results_csv`].
pub fn read_results_csv<R: BufRead>(r: R) -> io::Result<Vec<ResultRow>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == RESULTS_HEADER => {}
        other => return Err(bad(format!("bad results header: {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad(format!("bad results row: {line}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{e} in `{line}`")));
        rows.push(ResultRow {
            policy: f[0].to_string(),
            tolerance: num(f[1])?,
            query_rate: num(f[2])?,
            report_rate: num(f[3])?,
            service_rate: num(f[4])?,
            avg_cost: num(f[5])?,
            avg_cost_ci: num(f[6])?,
            db_util: num(f[7])?,
            db_util_ci: num(f[8])?,
            mean_sojourn: num(f[9])?,
        });
    }
    Ok(rows)
}

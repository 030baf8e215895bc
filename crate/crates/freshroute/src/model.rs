//! The discrete-time routing model.
//!
//! A wireless sensor network (WSN) serves queries and reports under processor
//! sharing at total rate μ; a database (DB) answers queries instantly from
//! stored data whose age grows until the next report completion resets it.
//! Uniformizing the continuous-time chain at rate `B ≥ λ1 + λ2 + μ` and
//! counting age in exponential phases gives a discrete-time Markov decision
//! process on states `(i, j, N)`:
//!
//! - `i`  — queries in the WSN,
//! - `j`  — reports in the WSN,
//! - `N`  — age phases since the last report completion.
//!
//! Each step, exactly one of: a query arrives (prob λ1/B, routed per the
//! action), a report arrives (λ2/B), a job completes (μ/B split
//! proportionally between queries and reports), or nothing happens (residual
//! dummy transition). Age increments every step except a report completion,
//! which resets it to zero.
//!
//! The state space is truncated at `(i_max, j_max, n_max)` with clamping:
//! a transition that would exceed a cap lands on the cap instead, so the
//! kernel stays stochastic.

use thiserror::Error;

/// Routing decision for an arriving query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    /// Answer instantly from the database (stale-data penalty may apply).
    Db,
    /// Enqueue in the sensor network (holding cost while waiting).
    Wsn,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Db => "DB",
            Action::Wsn => "WSN",
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "DB" => Ok(Action::Db),
            "WSN" => Ok(Action::Wsn),
            other => Err(format!("unknown action `{other}` (expected DB or WSN)")),
        }
    }
}

/// A truncated state `(i, j, N)` of the discrete-time chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct State {
    /// Queries in the WSN.
    pub i: u32,
    /// Reports in the WSN.
    pub j: u32,
    /// Age phases since the last report completion.
    pub age_phases: u32,
}

impl State {
    pub fn new(i: u32, j: u32, age_phases: u32) -> Self {
        Self { i, j, age_phases }
    }
}

/// Raw model parameters: event rates, validity tolerance, uniformization
/// rate, and truncation caps.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Query arrival rate λ1 (> 0).
    pub query_rate: f64,
    /// Report arrival rate λ2 (> 0, must be < service_rate).
    pub report_rate: f64,
    /// WSN processor-sharing service rate μ (> 0).
    pub service_rate: f64,
    /// Data-validity tolerance T in time units (≥ 0); DB answers older than
    /// this incur a linear penalty.
    pub tolerance: f64,
    /// Uniformization rate B (≥ λ1 + λ2 + μ).
    pub uniformization_rate: f64,
    /// Truncation cap on queries.
    pub i_max: u32,
    /// Truncation cap on reports.
    pub j_max: u32,
    /// Truncation cap on age phases.
    pub n_max: u32,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("stability violation: report rate {report_rate} must be < service rate {service_rate}")]
    StabilityViolation { report_rate: f64, service_rate: f64 },
    #[error("uniformization violation: B = {b} must be >= lambda1 + lambda2 + mu = {rate_sum}")]
    UniformizationViolation { b: f64, rate_sum: f64 },
    #[error("invalid truncation: {what} must be >= 1")]
    InvalidTruncation { what: &'static str },
    #[error("invalid rate: {what} = {value} must be positive and finite")]
    InvalidRate { what: &'static str, value: f64 },
    #[error("state ({i}, {j}, {age_phases}) outside truncation caps ({i_max}, {j_max}, {n_max})")]
    OutOfRangeState {
        i: u32,
        j: u32,
        age_phases: u32,
        i_max: u32,
        j_max: u32,
        n_max: u32,
    },
}

impl ModelParams {
    /// Parameters with conventional defaults: `B = multiplier · (λ1+λ2+μ)`,
    /// caps `i_max = j_max = 40`, and `n_max` sized so the age grid spans at
    /// least ten times `max(T, 1/λ2)`.
    pub fn with_defaults(
        query_rate: f64,
        report_rate: f64,
        service_rate: f64,
        tolerance: f64,
        b_multiplier: f64,
    ) -> Self {
        let b = b_multiplier * (query_rate + report_rate + service_rate);
        Self {
            query_rate,
            report_rate,
            service_rate,
            tolerance,
            uniformization_rate: b,
            i_max: 40,
            j_max: 40,
            n_max: default_age_cap(b, tolerance, report_rate),
        }
    }
}

/// Default age cap: smallest integer with `n_max / B ≥ 10 · max(T, 1/λ2)`.
pub fn default_age_cap(b: f64, tolerance: f64, report_rate: f64) -> u32 {
    (10.0 * b * tolerance.max(1.0 / report_rate)).ceil() as u32
}

/// The uniformized model: per-step event probabilities, the tolerance in age
/// phases, and the truncated grid.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    /// λ1' = λ1 / B.
    pub query_prob: f64,
    /// λ2' = λ2 / B.
    pub report_prob: f64,
    /// μ' = μ / B.
    pub service_prob: f64,
    /// Tolerance in age phases, `round(T · B)`.
    pub tolerance_phases: u32,
    /// `|T · B − tolerance_phases|`, the cost of rounding the tolerance to
    /// the phase grid.
    pub tolerance_rounding_error: f64,
    /// Number of states on the truncated grid.
    pub state_count: usize,
}

impl Model {
    /// Builds the uniformized model, rejecting parameter sets that violate
    /// the stability, uniformization, or truncation invariants.
    pub fn new(params: ModelParams) -> Result<Self, ModelError> {
        for (what, value) in [
            ("query rate", params.query_rate),
            ("report rate", params.report_rate),
            ("service rate", params.service_rate),
            ("uniformization rate", params.uniformization_rate),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidRate { what, value });
            }
        }
        if !(params.tolerance >= 0.0 && params.tolerance.is_finite()) {
            return Err(ModelError::InvalidRate {
                what: "tolerance",
                value: params.tolerance,
            });
        }
        if params.report_rate >= params.service_rate {
            return Err(ModelError::StabilityViolation {
                report_rate: params.report_rate,
                service_rate: params.service_rate,
            });
        }
        let rate_sum = params.query_rate + params.report_rate + params.service_rate;
        if params.uniformization_rate < rate_sum {
            return Err(ModelError::UniformizationViolation {
                b: params.uniformization_rate,
                rate_sum,
            });
        }
        for (what, cap) in [
            ("i_max", params.i_max),
            ("j_max", params.j_max),
            ("n_max", params.n_max),
        ] {
            if cap < 1 {
                return Err(ModelError::InvalidTruncation { what });
            }
        }

        let b = params.uniformization_rate;
        let phases_exact = params.tolerance * b;
        let tolerance_phases = phases_exact.round() as u32;
        let state_count =
            (params.i_max as usize + 1) * (params.j_max as usize + 1) * (params.n_max as usize + 1);
        Ok(Self {
            query_prob: params.query_rate / b,
            report_prob: params.report_rate / b,
            service_prob: params.service_rate / b,
            tolerance_phases,
            tolerance_rounding_error: (phases_exact - tolerance_phases as f64).abs(),
            state_count,
            params,
        })
    }

    pub fn contains(&self, s: State) -> bool {
        s.i <= self.params.i_max && s.j <= self.params.j_max && s.age_phases <= self.params.n_max
    }

    fn check_state(&self, s: State) -> Result<(), ModelError> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(ModelError::OutOfRangeState {
                i: s.i,
                j: s.j,
                age_phases: s.age_phases,
                i_max: self.params.i_max,
                j_max: self.params.j_max,
                n_max: self.params.n_max,
            })
        }
    }

    /// Linear index of a state, row-major in `(i, j, N)`.
    pub fn index(&self, s: State) -> usize {
        let n_stride = self.params.n_max as usize + 1;
        let j_stride = (self.params.j_max as usize + 1) * n_stride;
        s.i as usize * j_stride + s.j as usize * n_stride + s.age_phases as usize
    }

    /// Inverse of [`Model::index`].
    pub fn state_at(&self, index: usize) -> State {
        let n_stride = self.params.n_max as usize + 1;
        let j_stride = (self.params.j_max as usize + 1) * n_stride;
        State {
            i: (index / j_stride) as u32,
            j: (index % j_stride / n_stride) as u32,
            age_phases: (index % n_stride) as u32,
        }
    }

    /// Iterates all states in index order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.state_count).map(|idx| self.state_at(idx))
    }

    /// Processor-sharing fractions `(i/(i+j), j/(i+j))`, zero on the empty
    /// system.
    pub fn sharing_fractions(i: u32, j: u32) -> (f64, f64) {
        let total = i + j;
        if total == 0 {
            (0.0, 0.0)
        } else {
            (i as f64 / total as f64, j as f64 / total as f64)
        }
    }

    /// Per-step one-step transition distribution from `s` under action `d`.
    ///
    /// Successor components beyond a truncation cap are clamped to the cap
    /// and their probability merged, so the entries always sum to one.
    pub fn transitions(&self, s: State, d: Action) -> Result<Vec<(State, f64)>, ModelError> {
        self.check_state(s)?;
        let caps = &self.params;
        let up_i = (s.i + 1).min(caps.i_max);
        let up_j = (s.j + 1).min(caps.j_max);
        let up_n = (s.age_phases + 1).min(caps.n_max);
        let (phi_query, phi_report) = Self::sharing_fractions(s.i, s.j);
        let busy = s.i + s.j > 0;

        let mut entries: Vec<(State, f64)> = Vec::with_capacity(6);
        let mut push = |state: State, p: f64| {
            if p <= 0.0 {
                return;
            }
            if let Some(slot) = entries.iter_mut().find(|(t, _)| *t == state) {
                slot.1 += p;
            } else {
                entries.push((state, p));
            }
        };

        // Query arrival: routed to the WSN or absorbed by the DB.
        match d {
            Action::Wsn => push(State::new(up_i, s.j, up_n), self.query_prob),
            Action::Db => push(State::new(s.i, s.j, up_n), self.query_prob),
        }
        // Report arrival.
        push(State::new(s.i, up_j, up_n), self.report_prob);
        // Query completion.
        if s.i > 0 {
            push(State::new(s.i - 1, s.j, up_n), self.service_prob * phi_query);
        }
        // Report completion resets the age.
        if s.j > 0 {
            push(State::new(s.i, s.j - 1, 0), self.service_prob * phi_report);
        }
        // Dummy self-epoch from uniformization.
        let residual = 1.0
            - (self.query_prob
                + self.report_prob
                + if busy { self.service_prob } else { 0.0 });
        push(State::new(s.i, s.j, up_n), residual);

        Ok(entries)
    }

    /// Expected cost of one step from `s` under `d`, in per-step units.
    ///
    /// Holding contributes `i / B`; a DB assignment adds the expected stale
    /// penalty `λ1' · (N/B − T)⁺`. Multiply by `B` for per-unit-time cost.
    pub fn stage_cost(&self, s: State, d: Action) -> f64 {
        debug_assert!(self.contains(s), "stage_cost on out-of-range state {s:?}");
        let b = self.params.uniformization_rate;
        let holding = s.i as f64 / b;
        match d {
            Action::Wsn => holding,
            Action::Db => holding + self.query_prob * self.stale_penalty(s.age_phases),
        }
    }

    /// Stale-data penalty `(N/B − T)⁺` for answering from the DB at age
    /// phase `N`, in time units.
    pub fn stale_penalty(&self, age_phases: u32) -> f64 {
        (age_phases as f64 / self.params.uniformization_rate - self.params.tolerance).max(0.0)
    }
}

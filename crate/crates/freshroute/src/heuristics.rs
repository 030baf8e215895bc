//! Fixed routing heuristics and their closed-form average costs.
//!
//! Three rules commonly used in practice:
//!
//! - **always-DB**: every query is answered from the database,
//! - **always-WSN**: every query joins the sensor network,
//! - **age-threshold**: database while the age is within tolerance
//!   (`N ≤ T_ph`), sensor network otherwise.
//!
//! The first two admit closed forms. Always-WSN is the mean queue length of
//! an M/M/1 processor-sharing system and is exact in both the discrete and
//! the continuous model. Always-DB is exact for the phase-counted discrete
//! chain, where the stationary age is geometric; its large-B limit
//! `(λ1/λ2)·e^{−λ2·T}` is the exact value for the continuous-time system,
//! where the stationary age is exponential. At coarse uniformization rates
//! the two differ by O(1/B) — [`cost_always_db`] and
//! [`cost_always_db_limit`] expose both. The age-threshold rule has no
//! closed form and is evaluated by simulation only.

use crate::model::{Action, Model};
use thiserror::Error;

/// The three fixed heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicKind {
    AlwaysDb,
    AlwaysWsn,
    /// DB while `N ≤ T_ph`, WSN beyond.
    AgeThreshold,
}

impl HeuristicKind {
    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::AlwaysDb => "db",
            HeuristicKind::AlwaysWsn => "wsn",
            HeuristicKind::AgeThreshold => "threshold",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeuristicError {
    #[error(
        "always-WSN is unstable: lambda1 + lambda2 = {arrival_sum} >= mu = {service_rate}"
    )]
    UnstableUnderPolicy { arrival_sum: f64, service_rate: f64 },
}

/// A heuristic as a decision rule on `(i, j, N)`.
#[derive(Debug, Clone, Copy)]
pub struct HeuristicPolicy {
    pub kind: HeuristicKind,
    tolerance_phases: u32,
}

impl HeuristicPolicy {
    pub fn assign(&self, _i: u32, _j: u32, age_phases: u32) -> Action {
        match self.kind {
            HeuristicKind::AlwaysDb => Action::Db,
            HeuristicKind::AlwaysWsn => Action::Wsn,
            HeuristicKind::AgeThreshold => {
                if age_phases <= self.tolerance_phases {
                    Action::Db
                } else {
                    Action::Wsn
                }
            }
        }
    }
}

/// Instantiates `kind` against the model's phase-valued tolerance.
pub fn heuristic_policy(kind: HeuristicKind, model: &Model) -> HeuristicPolicy {
    HeuristicPolicy {
        kind,
        tolerance_phases: model.tolerance_phases,
    }
}

/// Average cost per unit time of always-WSN: `λ1 / (μ − λ1 − λ2)`, the
/// expected number of queries in the processor-sharing system.
///
/// Requires full-traffic stability `λ1 + λ2 < μ`, which is stricter than the
/// model's `λ2 < μ`.
pub fn cost_always_wsn(model: &Model) -> Result<f64, HeuristicError> {
    let p = &model.params;
    let arrival_sum = p.query_rate + p.report_rate;
    if arrival_sum >= p.service_rate {
        return Err(HeuristicError::UnstableUnderPolicy {
            arrival_sum,
            service_rate: p.service_rate,
        });
    }
    Ok(p.query_rate / (p.service_rate - arrival_sum))
}

/// Average cost per unit time of always-DB in the phase-counted chain:
/// `(λ1'/λ2') · (1 − λ2')^{T_ph + 1}`.
///
/// Exact for the discrete model (geometric stationary age). The per-step and
/// per-phase unit conversions cancel, so the value is already per unit time.
pub fn cost_always_db(model: &Model) -> f64 {
    let ratio = model.query_prob / model.report_prob;
    ratio * (1.0 - model.report_prob).powi(model.tolerance_phases as i32 + 1)
}

/// Large-B limit of [`cost_always_db`]: `(λ1/λ2) · e^{−λ2·T}`.
///
/// This is also the exact always-DB cost of the continuous-time system,
/// where the stationary age since the last report completion is
/// exponential(λ2).
pub fn cost_always_db_limit(query_rate: f64, report_rate: f64, tolerance: f64) -> f64 {
    query_rate / report_rate * (-report_rate * tolerance).exp()
}

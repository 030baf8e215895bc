//! Query-arrival traces: parsing, rate estimation, per-minute binning, and a
//! bursty synthetic generator for replay experiments.
//!
//! The file format is one decimal timestamp (seconds) per line; blank lines
//! and lines starting with `#` are ignored. Timestamps must be
//! nondecreasing — out-of-order input is rejected rather than sorted, as a
//! guard against corrupt logs.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp};
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: cannot parse `{content}` as a timestamp")]
    Parse { line: usize, content: String },
    #[error("line {line}: timestamp {value} is earlier than its predecessor {previous}")]
    NonMonotone {
        line: usize,
        value: f64,
        previous: f64,
    },
    #[error("trace contains no timestamps")]
    Empty,
    #[error("rate estimation needs at least two distinct timestamps")]
    InsufficientPoints,
    #[error("{what} must be positive, got {value}")]
    NonPositiveRate { what: &'static str, value: f64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A nondecreasing sequence of query-arrival timestamps in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    timestamps: Vec<f64>,
}

impl Trace {
    /// Wraps a timestamp sequence, validating monotonicity and non-emptiness.
    pub fn new(timestamps: Vec<f64>) -> Result<Self, TraceError> {
        if timestamps.is_empty() {
            return Err(TraceError::Empty);
        }
        for (k, pair) in timestamps.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(TraceError::NonMonotone {
                    line: k + 2,
                    value: pair[1],
                    previous: pair[0],
                });
            }
        }
        Ok(Self { timestamps })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn count(&self) -> usize {
        self.timestamps.len()
    }

    /// Last minus first timestamp.
    pub fn span(&self) -> f64 {
        self.timestamps.last().unwrap() - self.timestamps[0]
    }

    pub fn first(&self) -> f64 {
        self.timestamps[0]
    }

    /// The same trace shifted so the first arrival is at time zero.
    pub fn rebased(&self) -> Trace {
        let t0 = self.first();
        Trace {
            timestamps: self.timestamps.iter().map(|t| t - t0).collect(),
        }
    }

    /// Serializes one timestamp per line. Parsing the output reproduces the
    /// trace exactly.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in &self.timestamps {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }
}

/// Parses a trace log: one timestamp per line, `#` comments and blank lines
/// ignored.
pub fn parse_trace<R: BufRead>(input: R) -> Result<Trace, TraceError> {
    let mut timestamps = Vec::new();
    let mut previous: Option<f64> = None;
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let value: f64 = text.parse().map_err(|_| TraceError::Parse {
            line: k + 1,
            content: text.to_string(),
        })?;
        if !value.is_finite() {
            return Err(TraceError::Parse {
                line: k + 1,
                content: text.to_string(),
            });
        }
        if let Some(prev) = previous {
            if value < prev {
                return Err(TraceError::NonMonotone {
                    line: k + 1,
                    value,
                    previous: prev,
                });
            }
        }
        previous = Some(value);
        timestamps.push(value);
    }
    if timestamps.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(Trace { timestamps })
}

/// Arrival rate as the reciprocal mean inter-arrival time,
/// `(count − 1) / span`.
pub fn estimate_rate(trace: &Trace) -> Result<f64, TraceError> {
    if trace.count() < 2 || trace.span() <= 0.0 {
        return Err(TraceError::InsufficientPoints);
    }
    Ok((trace.count() as f64 - 1.0) / trace.span())
}

/// Arrival counts in consecutive 60-second windows from the first timestamp.
/// Every window up to the last arrival is emitted, including empty ones.
pub fn counts_per_minute(trace: &Trace) -> Vec<(u64, u64)> {
    let first = trace.first();
    let windows = ((trace.timestamps.last().unwrap() - first) / 60.0).floor() as u64 + 1;
    let mut counts = vec![0u64; windows as usize];
    for t in &trace.timestamps {
        let w = (((t - first) / 60.0).floor() as u64).min(windows - 1);
        counts[w as usize] += 1;
    }
    counts.into_iter().enumerate().map(|(k, c)| (k as u64, c)).collect()
}

/// Markov-modulated Poisson trace: arrivals at `high_rate` or `low_rate`
/// (events/second), with the regime toggling at exponential times of rate
/// `switch_rate`. Starts in the high regime; `switch_rate = 0` degenerates
/// to a plain Poisson process at `high_rate`.
pub fn synth_bursty_trace(
    high_rate: f64,
    low_rate: f64,
    switch_rate: f64,
    horizon: f64,
    seed: u64,
) -> Result<Trace, TraceError> {
    for (what, value) in [("high_rate", high_rate), ("low_rate", low_rate)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(TraceError::NonPositiveRate { what, value });
        }
    }
    if !(switch_rate >= 0.0 && switch_rate.is_finite()) {
        return Err(TraceError::NonPositiveRate {
            what: "switch_rate",
            value: switch_rate,
        });
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(TraceError::NonPositiveRate {
            what: "horizon",
            value: horizon,
        });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let unit_exp = Exp::new(1.0).expect("unit rate");
    let mut timestamps = Vec::new();
    let mut clock = 0.0;
    let mut high = true;
    loop {
        let rate = if high { high_rate } else { low_rate };
        let dt_arrival = unit_exp.sample(&mut rng) / rate;
        let dt_switch = if switch_rate > 0.0 {
            unit_exp.sample(&mut rng) / switch_rate
        } else {
            f64::INFINITY
        };
        if dt_arrival <= dt_switch {
            clock += dt_arrival;
            if clock > horizon {
                break;
            }
            timestamps.push(clock);
        } else {
            clock += dt_switch;
            if clock > horizon {
                break;
            }
            high = !high;
        }
    }
    if timestamps.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(Trace { timestamps })
}

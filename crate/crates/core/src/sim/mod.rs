//! Fleet simulation on synthetic or replayed demand.

mod demand;
mod io;
mod metrics;
mod world;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::AssignError;
use crate::model::{BatchConfig, ModelError, Seconds};
use crate::routing::RoutingError;

pub use demand::{generate_demand, sample_trips, Area, Hotspot, TripSample};
pub use io::{
    load_scenario, parse_scenario, read_metrics, read_requests, read_series, write_metrics, write_requests,
    write_series, SeriesRow,
};
pub use metrics::{MetricsReport, MetricsRow};
pub use world::{run, run_with_demand, RideRecord, StopEvent, World};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("bad CSV input: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("simulation invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Ia,
    Greedy,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Ia => "ia",
            Strategy::Greedy => "greedy",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ia" => Ok(Strategy::Ia),
            "greedy" => Ok(Strategy::Greedy),
            other => Err(format!("unknown strategy `{other}` (expected ia or greedy)")),
        }
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub fleet_size: usize,
    pub vehicle_capacity: u32,
    /// Requests are generated in `[0, horizon)`; the run continues until
    /// every request is resolved.
    pub horizon: Seconds,
    pub area: Area,
    /// Expected requests per hour, indexed by hour of day and repeated.
    pub hourly_rates: Vec<f64>,
    pub seed: u64,
    pub strategy: Strategy,
    /// Relative weights of party sizes 1, 2, 3, ...
    pub party_weights: Vec<f64>,
    pub hotspots: Vec<Hotspot>,
    /// Probability that a trip end is drawn around a hotspot.
    pub hotspot_share: f64,
    /// Trips shorter than this are redrawn.
    pub min_trip_m: f64,
    /// Motion step between events, in seconds.
    pub time_step: Seconds,
    /// How often the greedy dispatcher retries a rejected request.
    pub greedy_retry_period: Seconds,
    /// Record wall-clock time per batch. Off makes metrics fully
    /// reproducible byte for byte.
    pub report_cpu: bool,
    pub batch: BatchConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            fleet_size: 100,
            vehicle_capacity: 4,
            horizon: 24 * 3600,
            area: Area { min_x: 0.0, min_y: 0.0, max_x: 10_000.0, max_y: 10_000.0 },
            hourly_rates: vec![100.0; 24],
            seed: 1,
            strategy: Strategy::Ia,
            party_weights: vec![0.85, 0.10, 0.04, 0.01],
            hotspots: Vec::new(),
            hotspot_share: 0.0,
            min_trip_m: 500.0,
            time_step: 2,
            greedy_retry_period: 10,
            report_cpu: true,
            batch: BatchConfig::default(),
        }
    }
}

/// Relative demand by hour of day: quiet nights, a sharp morning peak and a
/// broader evening shoulder.
const DAY_PROFILE: [f64; 24] = [
    0.6, 0.4, 0.3, 0.3, 0.5, 1.2, 2.6, 4.6, 5.0, 3.6, 2.4, 2.2, 2.4, 2.3, 2.3, 2.6, 3.2, 3.8, 3.4, 2.6, 2.0, 1.6, 1.2,
    0.9,
];

impl Scenario {
    /// A 24-hour day of about 5,000 requests served by 100 four-seat
    /// vehicles in a 10 km square with two downtown hotspots.
    pub fn standard() -> Self {
        let total: f64 = DAY_PROFILE.iter().sum();
        Self {
            hourly_rates: DAY_PROFILE.iter().map(|w| w * 5000.0 / total).collect(),
            hotspots: vec![
                Hotspot { x: 3500.0, y: 6000.0, sigma: 1200.0, weight: 2.0 },
                Hotspot { x: 7000.0, y: 3500.0, sigma: 1500.0, weight: 1.0 },
            ],
            hotspot_share: 0.5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: &str| Err(SimError::Config(msg.to_string()));
        if self.fleet_size == 0 {
            return fail("fleet_size must be at least 1");
        }
        if self.vehicle_capacity == 0 {
            return fail("vehicle_capacity must be at least 1");
        }
        if self.horizon <= 0 {
            return fail("horizon must be positive");
        }
        if !self.area.is_valid() {
            return fail("area must have finite bounds with min < max");
        }
        if self.hourly_rates.is_empty() || self.hourly_rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return fail("hourly_rates must be a nonempty list of non-negative numbers");
        }
        if self.party_weights.is_empty()
            || self.party_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || self.party_weights.iter().sum::<f64>() <= 0.0
        {
            return fail("party_weights must be non-negative with a positive sum");
        }
        if self.hotspots.iter().any(|h| !h.is_valid()) {
            return fail("hotspots need finite centers, positive sigma and positive weight");
        }
        if !(0.0..=1.0).contains(&self.hotspot_share) || (self.hotspot_share > 0.0 && self.hotspots.is_empty()) {
            return fail("hotspot_share must be in [0, 1] and needs at least one hotspot when positive");
        }
        if !self.min_trip_m.is_finite() || self.min_trip_m < 0.0 {
            return fail("min_trip_m must be non-negative");
        }
        if self.time_step <= 0 || self.greedy_retry_period <= 0 {
            return fail("time_step and greedy_retry_period must be positive");
        }
        self.batch.validate().map_err(|e| SimError::Config(e.to_string()))
    }
}

use serde::{Deserialize, Serialize};

use crate::model::Seconds;

use super::Strategy;

/// Summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub row: MetricsRow,
    /// Mean riders per moving vehicle, per hour.
    pub occupancy_series: Vec<f64>,
    /// Moving vehicle-hours, per hour.
    pub time_spent_series: Vec<f64>,
}

/// The flat, CSV-ready part of a report. Times are in minutes except the
/// per-batch CPU time, which is in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub strategy: Strategy,
    pub fleet_size: usize,
    pub candidates: usize,
    pub lambda: f64,
    pub batch_period: Seconds,
    pub seed: u64,
    pub requests: usize,
    pub served: usize,
    pub served_pct: f64,
    pub vht: f64,
    pub travel_per_request: f64,
    pub journey_time: f64,
    pub wait_time: f64,
    pub avg_occupancy: f64,
    pub cpu_per_batch: f64,
}

/// Running totals collected while the world advances.
#[derive(Debug, Clone, Default)]
pub(crate) struct Accumulator {
    vehicle_seconds: Vec<f64>,
    rider_seconds: Vec<f64>,
    pub(crate) cpu_seconds: f64,
    pub(crate) cpu_batches: usize,
}

impl Accumulator {
    /// Adds a moving interval `[from, to)` carrying `riders` passengers,
    /// split across hour buckets.
    pub(crate) fn add_leg(&mut self, from: Seconds, to: Seconds, riders: u32) {
        let mut t = from;
        while t < to {
            let hour = (t / 3600) as usize;
            let end = to.min((hour as Seconds + 1) * 3600);
            if self.vehicle_seconds.len() <= hour {
                self.vehicle_seconds.resize(hour + 1, 0.0);
                self.rider_seconds.resize(hour + 1, 0.0);
            }
            let span = (end - t) as f64;
            self.vehicle_seconds[hour] += span;
            self.rider_seconds[hour] += span * riders as f64;
            t = end;
        }
    }

    pub(crate) fn total_vehicle_seconds(&self) -> f64 {
        self.vehicle_seconds.iter().sum()
    }

    pub(crate) fn total_rider_seconds(&self) -> f64 {
        self.rider_seconds.iter().sum()
    }

    /// Per-hour occupancy and vehicle-hours over `hours` buckets.
    pub(crate) fn series(&self, hours: usize) -> (Vec<f64>, Vec<f64>) {
        let hours = hours.max(self.vehicle_seconds.len());
        let get = |v: &Vec<f64>, h: usize| v.get(h).copied().unwrap_or(0.0);
        let occupancy = (0..hours)
            .map(|h| {
                let moving = get(&self.vehicle_seconds, h);
                if moving > 0.0 {
                    get(&self.rider_seconds, h) / moving
                } else {
                    0.0
                }
            })
            .collect();
        let time = (0..hours).map(|h| get(&self.vehicle_seconds, h) / 3600.0).collect();
        (occupancy, time)
    }
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{BatchConfig, Location, Request, RequestId, Seconds};

use super::{MetricsReport, MetricsRow, Scenario, SimError, Strategy};

/// Parses a TOML scenario; missing keys take their defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario, SimError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| SimError::Config(e.message().to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, SimError> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text)
}

#[derive(Debug, Serialize, Deserialize)]
struct RequestRecord {
    id: u32,
    submit_time_s: Seconds,
    ox_m: f64,
    oy_m: f64,
    dx_m: f64,
    dy_m: f64,
    party: u32,
}

/// Reads a replay file with columns
/// `id, submit_time_s, ox_m, oy_m, dx_m, dy_m, party`.
pub fn read_requests<R: Read>(reader: R, config: &BatchConfig) -> Result<Vec<Request>, SimError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for record in csv.deserialize() {
        let rec: RequestRecord = record?;
        let origin = Location::new(rec.ox_m, rec.oy_m);
        let destination = Location::new(rec.dx_m, rec.dy_m);
        let bad = |what: &str| Err(SimError::Config(format!("request {}: {what}", rec.id)));
        if !seen.insert(rec.id) {
            return bad("duplicate id");
        }
        if rec.submit_time_s < 0 {
            return bad("negative submit time");
        }
        if rec.party == 0 {
            return bad("party must be at least 1");
        }
        if !origin.is_finite() || !destination.is_finite() {
            return bad("coordinates must be finite");
        }
        out.push(Request::new(RequestId(rec.id), rec.submit_time_s, origin, destination, rec.party, config));
    }
    Ok(out)
}

pub fn write_requests<W: Write>(writer: W, requests: &[Request]) -> Result<(), SimError> {
    let mut csv = csv::Writer::from_writer(writer);
    for r in requests {
        csv.serialize(RequestRecord {
            id: r.id.0,
            submit_time_s: r.submit_time,
            ox_m: r.origin.x,
            oy_m: r.origin.y,
            dx_m: r.destination.x,
            dy_m: r.destination.y,
            party: r.party_size,
        })?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes one row per run, with a header.
pub fn write_metrics<W: Write>(writer: W, rows: &[MetricsRow]) -> Result<(), SimError> {
    let mut csv = csv::Writer::from_writer(writer);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_metrics<R: Read>(reader: R) -> Result<Vec<MetricsRow>, SimError> {
    let mut csv = csv::Reader::from_reader(reader);
    Ok(csv.deserialize().collect::<Result<_, _>>()?)
}

/// One hour of one run in the time-series output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub strategy: Strategy,
    pub fleet_size: usize,
    pub candidates: usize,
    pub lambda: f64,
    pub batch_period: Seconds,
    pub hour: usize,
    pub occupancy: f64,
    pub vehicle_hours: f64,
}

impl MetricsReport {
    pub fn series_rows(&self) -> Vec<SeriesRow> {
        self.occupancy_series
            .iter()
            .zip(&self.time_spent_series)
            .enumerate()
            .map(|(hour, (&occupancy, &vehicle_hours))| SeriesRow {
                strategy: self.row.strategy,
                fleet_size: self.row.fleet_size,
                candidates: self.row.candidates,
                lambda: self.row.lambda,
                batch_period: self.row.batch_period,
                hour,
                occupancy,
                vehicle_hours,
            })
            .collect()
    }
}

pub fn write_series<W: Write>(writer: W, rows: &[SeriesRow]) -> Result<(), SimError> {
    let mut csv = csv::Writer::from_writer(writer);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_series<R: Read>(reader: R) -> Result<Vec<SeriesRow>, SimError> {
    let mut csv = csv::Reader::from_reader(reader);
    Ok(csv.deserialize().collect::<Result<_, _>>()?)
}

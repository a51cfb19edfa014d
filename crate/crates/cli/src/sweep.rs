use std::fmt;
use std::str::FromStr;

use poolcore::sim::{MetricsRow, Scenario, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    FleetSize,
    Candidates,
    Lambda,
    BatchPeriod,
}

impl Axis {
    fn is_integral(self) -> bool {
        self != Axis::Lambda
    }

    fn apply(self, scenario: &mut Scenario, value: f64) {
        match self {
            Axis::FleetSize => scenario.fleet_size = value as usize,
            Axis::Candidates => scenario.batch.candidates_per_request = Some(value as usize),
            Axis::Lambda => scenario.batch.lambda = value,
            Axis::BatchPeriod => scenario.batch.batch_period = value as i64,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::FleetSize => "fleet_size",
            Axis::Candidates => "candidates_per_request",
            Axis::Lambda => "lambda",
            Axis::BatchPeriod => "batch_period",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fleet" | "fleet_size" => Ok(Axis::FleetSize),
            "candidates" | "candidates_per_request" | "n" => Ok(Axis::Candidates),
            "lambda" => Ok(Axis::Lambda),
            "batch" | "batch_period" | "b" => Ok(Axis::BatchPeriod),
            other => Err(format!("unknown sweep axis `{other}` (expected fleet_size, candidates, lambda or batch)")),
        }
    }
}

/// The `AXIS=v1,v2,...` argument, before it is checked against a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisValues {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl FromStr for AxisValues {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (axis, list) = s.split_once('=').ok_or_else(|| format!("expected AXIS=v1,v2,..., got `{s}`"))?;
        let axis: Axis = axis.parse()?;
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| {
                let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
                if !x.is_finite() || (axis.is_integral() && (x.fract() != 0.0 || x < 0.0)) {
                    return Err(format!("`{v}` is not a valid {axis}"));
                }
                Ok(x)
            })
            .collect::<Result<Vec<f64>, String>>()?;
        if values.is_empty() {
            return Err(format!("the {axis} sweep has no values"));
        }
        Ok(AxisValues { axis, values })
    }
}

/// A base scenario and one axis to vary, one run per value and strategy.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: Scenario,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub strategies: Vec<Strategy>,
}

impl SweepSpec {
    /// Sorts the values and checks each resulting scenario.
    pub fn new(base: Scenario, axis: AxisValues, strategies: Vec<Strategy>) -> Result<Self, CliError> {
        let mut values = axis.values;
        values.sort_by(f64::total_cmp);
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Usage(format!("duplicate values in the {} sweep", axis.axis)));
        }
        let spec = SweepSpec { base, axis: axis.axis, values, strategies };
        for (value, _, scenario) in spec.runs() {
            scenario.validate().map_err(|e| CliError::Usage(format!("{}={value}: {e}", spec.axis)))?;
        }
        Ok(spec)
    }

    /// Scenarios in output order: by value, then by strategy as given.
    pub fn runs(&self) -> Vec<(f64, Strategy, Scenario)> {
        let mut out = Vec::new();
        for &value in &self.values {
            for &strategy in &self.strategies {
                let mut s = self.base.clone();
                self.axis.apply(&mut s, value);
                s.strategy = strategy;
                out.push((value, strategy, s));
            }
        }
        out
    }
}

/// One line of the sweep table. Run rows carry every metric; difference
/// rows (strategy `delta_pct`) carry only the compared metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub strategy: String,
    pub fleet_size: Option<usize>,
    pub candidates: Option<usize>,
    pub lambda: Option<f64>,
    pub batch_period: Option<i64>,
    pub seed: Option<u64>,
    pub requests: Option<usize>,
    pub served: Option<usize>,
    pub served_pct: Option<f64>,
    pub vht: Option<f64>,
    pub travel_per_request: Option<f64>,
    pub journey_time: Option<f64>,
    pub wait_time: Option<f64>,
    pub avg_occupancy: Option<f64>,
    pub cpu_per_batch: Option<f64>,
    pub error: String,
}

impl SweepRow {
    fn empty(axis: Axis, value: f64, strategy: String) -> Self {
        SweepRow {
            axis: axis.to_string(),
            value: value.to_string(),
            strategy,
            fleet_size: None,
            candidates: None,
            lambda: None,
            batch_period: None,
            seed: None,
            requests: None,
            served: None,
            served_pct: None,
            vht: None,
            travel_per_request: None,
            journey_time: None,
            wait_time: None,
            avg_occupancy: None,
            cpu_per_batch: None,
            error: String::new(),
        }
    }

    pub fn from_run(axis: Axis, value: f64, strategy: Strategy, result: &Result<MetricsRow, String>) -> Self {
        let mut row = Self::empty(axis, value, strategy.to_string());
        match result {
            Ok(m) => {
                row.fleet_size = Some(m.fleet_size);
                row.candidates = Some(m.candidates);
                row.lambda = Some(m.lambda);
                row.batch_period = Some(m.batch_period);
                row.seed = Some(m.seed);
                row.requests = Some(m.requests);
                row.served = Some(m.served);
                row.served_pct = Some(m.served_pct);
                row.vht = Some(m.vht);
                row.travel_per_request = Some(m.travel_per_request);
                row.journey_time = Some(m.journey_time);
                row.wait_time = Some(m.wait_time);
                row.avg_occupancy = Some(m.avg_occupancy);
                row.cpu_per_batch = Some(m.cpu_per_batch);
            }
            Err(e) => row.error = e.clone(),
        }
        row
    }

    /// IA against greedy: served share as a point difference, the other
    /// metrics as percent change relative to greedy.
    pub fn delta(axis: Axis, value: f64, ia: &MetricsRow, greedy: &MetricsRow) -> Self {
        let pct = |a: f64, b: f64| if b != 0.0 { Some(100.0 * (a - b) / b) } else { None };
        let mut row = Self::empty(axis, value, "delta_pct".into());
        row.fleet_size = Some(ia.fleet_size);
        row.candidates = Some(ia.candidates);
        row.lambda = Some(ia.lambda);
        row.batch_period = Some(ia.batch_period);
        row.seed = Some(ia.seed);
        row.requests = Some(ia.requests);
        row.served_pct = Some(ia.served_pct - greedy.served_pct);
        row.vht = pct(ia.vht, greedy.vht);
        row.travel_per_request = pct(ia.travel_per_request, greedy.travel_per_request);
        row.journey_time = pct(ia.journey_time, greedy.journey_time);
        row.wait_time = pct(ia.wait_time, greedy.wait_time);
        row.avg_occupancy = pct(ia.avg_occupancy, greedy.avg_occupancy);
        row
    }
}

/// Builds the table: run rows in spec order, with a difference row after
/// each value when both strategies ran and succeeded.
pub fn table(spec: &SweepSpec, results: &[Result<MetricsRow, String>]) -> Vec<SweepRow> {
    let runs = spec.runs();
    let mut rows = Vec::new();
    for (chunk, outcomes) in runs.chunks(spec.strategies.len()).zip(results.chunks(spec.strategies.len())) {
        let value = chunk[0].0;
        for ((_, strategy, _), result) in chunk.iter().zip(outcomes) {
            rows.push(SweepRow::from_run(spec.axis, value, *strategy, result));
        }
        let find =
            |s: Strategy| chunk.iter().zip(outcomes).find(|(run, _)| run.1 == s).and_then(|(_, r)| r.as_ref().ok());
        if let (Some(ia), Some(greedy)) = (find(Strategy::Ia), find(Strategy::Greedy)) {
            rows.push(SweepRow::delta(spec.axis, value, ia, greedy));
        }
    }
    rows
}

//! Domain types shared by every other module: requests, vehicles, route
//! plans and the batch configuration.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whole seconds since scenario start (or a duration in seconds).
pub type Seconds = i64;

/// Rounds a non-negative real number of seconds half-up to whole seconds.
pub fn round_seconds(value: f64) -> Seconds {
    (value + 0.5).floor() as Seconds
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u32);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Point a fraction `t` of the way from `self` to `other`.
    pub fn lerp(&self, other: &Location, t: f64) -> Location {
        Location::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestState {
    Pending,
    Assigned,
    Expired,
    Served,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub submit_time: Seconds,
    pub origin: Location,
    pub destination: Location,
    pub party_size: u32,
    /// Travel time of the direct, unshared trip.
    pub direct_travel_time: Seconds,
    pub pickup_deadline: Seconds,
    pub travel_delay_budget: Seconds,
    pub state: RequestState,
}

impl Request {
    /// Builds a pending request, deriving direct travel time, pickup deadline
    /// and delay budget from `config`.
    pub fn new(
        id: RequestId,
        submit_time: Seconds,
        origin: Location,
        destination: Location,
        party_size: u32,
        config: &BatchConfig,
    ) -> Self {
        let direct = crate::geometry::travel_time(&origin, &destination, config);
        Self {
            id,
            submit_time,
            origin,
            destination,
            party_size,
            direct_travel_time: direct,
            pickup_deadline: submit_time + config.max_pickup_delay,
            travel_delay_budget: travel_delay_budget(direct, config),
            state: RequestState::Pending,
        }
    }

    /// Checks the request's invariants against the travel model in `config`.
    pub fn validate(&self, config: &BatchConfig) -> Result<(), ModelError> {
        if self.party_size < 1 {
            return Err(ModelError::Request(self.id, "party size must be at least 1"));
        }
        if !self.origin.is_finite() || !self.destination.is_finite() {
            return Err(ModelError::Request(self.id, "non-finite coordinates"));
        }
        if self.submit_time < 0 {
            return Err(ModelError::Request(self.id, "negative submit time"));
        }
        let direct = crate::geometry::travel_time(&self.origin, &self.destination, config);
        if self.direct_travel_time != direct {
            return Err(ModelError::Request(self.id, "direct travel time disagrees with the travel model"));
        }
        if self.travel_delay_budget != travel_delay_budget(direct, config) {
            return Err(ModelError::Request(self.id, "delay budget disagrees with the budget formula"));
        }
        if self.pickup_deadline != self.submit_time + config.max_pickup_delay {
            return Err(ModelError::Request(self.id, "pickup deadline disagrees with the pickup window"));
        }
        Ok(())
    }
}

/// Maximum tolerated journey delay for a trip of the given direct duration:
/// the larger of the fixed floor and a share of the direct travel time.
pub fn travel_delay_budget(direct_travel_time: Seconds, config: &BatchConfig) -> Seconds {
    let proportional = round_seconds(direct_travel_time as f64 * config.delay_percent);
    config.min_delay_floor.max(proportional)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopKind {
    Pickup,
    Dropoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub request_id: RequestId,
    pub kind: StopKind,
    pub location: Location,
    /// Absolute estimated arrival time.
    pub eta: Seconds,
}

impl Stop {
    pub fn pickup(request: &Request) -> Self {
        Self { request_id: request.id, kind: StopKind::Pickup, location: request.origin, eta: 0 }
    }

    pub fn dropoff(request: &Request) -> Self {
        Self { request_id: request.id, kind: StopKind::Dropoff, location: request.destination, eta: 0 }
    }
}

/// Ordered pickup/dropoff sequence a vehicle follows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoutePlan {
    pub stops: Vec<Stop>,
    /// Time the plan starts at the vehicle's location.
    pub start_time: Seconds,
    /// Seconds from `start_time` until the last stop is reached.
    pub total_duration: Seconds,
}

impl RoutePlan {
    pub fn empty(start_time: Seconds) -> Self {
        Self { stops: Vec::new(), start_time, total_duration: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn final_stop(&self) -> Option<&Stop> {
        self.stops.last()
    }

    /// Moves the plan's origin to `now`, keeping every stop's ETA.
    pub fn rebase(&mut self, now: Seconds) {
        self.start_time = now;
        self.total_duration = self.stops.last().map_or(0, |s| (s.eta - now).max(0));
    }

    pub fn eta_of(&self, request: RequestId, kind: StopKind) -> Option<Seconds> {
        self.stops.iter().find(|s| s.request_id == request && s.kind == kind).map(|s| s.eta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    pub capacity: u32,
    pub seats_available: u32,
    pub location: Location,
    pub route_plan: RoutePlan,
    /// Cleared by the greedy delay check; ignored by batch assignment.
    pub accepting: bool,
    /// Riders on board with their pickup times.
    pub onboard: Vec<(RequestId, Seconds)>,
}

impl Vehicle {
    pub fn idle(id: VehicleId, capacity: u32, location: Location, now: Seconds) -> Self {
        Self {
            id,
            capacity,
            seats_available: capacity,
            location,
            route_plan: RoutePlan::empty(now),
            accepting: true,
            onboard: Vec::new(),
        }
    }

    pub fn is_idle(&self) -> bool {
        self.route_plan.is_empty()
    }

    pub fn is_onboard(&self, request: RequestId) -> bool {
        self.onboard.iter().any(|(id, _)| *id == request)
    }

    /// Requests the vehicle is committed to (on board or awaiting pickup),
    /// each listed once, in plan order.
    pub fn committed_requests(&self) -> Vec<RequestId> {
        let mut ids: Vec<RequestId> = self.onboard.iter().map(|(id, _)| *id).collect();
        for stop in &self.route_plan.stops {
            if !ids.contains(&stop.request_id) {
                ids.push(stop.request_id);
            }
        }
        ids
    }

    /// Checks `0 <= seats_available <= capacity` and that seats account for
    /// every committed request.
    pub fn validate(&self, requests: &dyn RequestLookup) -> Result<(), ModelError> {
        let mut committed = 0u32;
        for id in self.committed_requests() {
            let request = requests.request(id).ok_or(ModelError::UnknownRequest(id))?;
            committed += request.party_size;
        }
        if committed > self.capacity || self.seats_available != self.capacity - committed {
            return Err(ModelError::Vehicle(self.id, "seat accounting mismatch"));
        }
        Ok(())
    }
}

/// Distance metric for travel times and stop ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// Parameters of one batch assignment and of the travel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    /// Batching period in seconds.
    pub batch_period: Seconds,
    /// Absolute number of candidate vehicles per request. Takes precedence
    /// over `candidate_share` when set.
    pub candidates_per_request: Option<usize>,
    /// Candidate count as a share of the fleet size.
    pub candidate_share: f64,
    /// Weight of the operator cost against the rider delay cost.
    pub lambda: f64,
    pub max_pickup_delay: Seconds,
    pub min_delay_floor: Seconds,
    pub delay_percent: f64,
    pub metric: Metric,
    /// Meters per second.
    pub speed: f64,
    /// Greedy direction test, in degrees.
    pub angle_threshold: f64,
    /// Greedy vehicles stop accepting once a rider's projected delay reaches
    /// this share of its budget.
    pub greedy_delay_fraction: f64,
    pub big_m_epsilon: f64,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            batch_period: 30,
            candidates_per_request: None,
            candidate_share: 0.10,
            lambda: 0.5,
            max_pickup_delay: 1800,
            min_delay_floor: 1800,
            delay_percent: 0.0,
            metric: Metric::Euclidean,
            speed: 10.0,
            angle_threshold: 10.0,
            greedy_delay_fraction: 0.9,
            big_m_epsilon: 1.0,
        }
    }
}

impl BatchConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |what: &'static str| Err(ModelError::Config(what));
        if self.batch_period <= 0 {
            return fail("batch_period must be positive");
        }
        if self.candidates_per_request == Some(0) {
            return fail("candidates_per_request must be at least 1");
        }
        if !(self.candidate_share > 0.0 && self.candidate_share <= 1.0) {
            return fail("candidate_share must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return fail("lambda must lie in [0, 1]");
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let non_negative = |x: f64| x.is_finite() && x >= 0.0;
        if !positive(self.speed) {
            return fail("speed must be positive");
        }
        if !positive(self.big_m_epsilon) {
            return fail("big_m_epsilon must be positive");
        }
        if self.max_pickup_delay < 0 || self.min_delay_floor < 0 || !non_negative(self.delay_percent) {
            return fail("delay thresholds must be non-negative");
        }
        if !non_negative(self.angle_threshold) {
            return fail("angle_threshold must be non-negative");
        }
        if !positive(self.greedy_delay_fraction) {
            return fail("greedy_delay_fraction must be positive");
        }
        Ok(())
    }

    /// Number of candidate vehicles examined per request for a fleet of the
    /// given size.
    pub fn candidates_for(&self, fleet_size: usize) -> usize {
        match self.candidates_per_request {
            Some(n) => n,
            None => ((fleet_size as f64 * self.candidate_share).ceil() as usize).max(1),
        }
    }
}

/// Read access to request records by id.
pub trait RequestLookup {
    fn request(&self, id: RequestId) -> Option<&Request>;
}

impl RequestLookup for [Request] {
    fn request(&self, id: RequestId) -> Option<&Request> {
        match self.get(id.0 as usize) {
            Some(r) if r.id == id => Some(r),
            _ => self.iter().find(|r| r.id == id),
        }
    }
}

impl RequestLookup for Vec<Request> {
    fn request(&self, id: RequestId) -> Option<&Request> {
        self.as_slice().request(id)
    }
}

impl RequestLookup for HashMap<RequestId, Request> {
    fn request(&self, id: RequestId) -> Option<&Request> {
        self.get(&id)
    }
}

impl RequestLookup for BTreeMap<RequestId, Request> {
    fn request(&self, id: RequestId) -> Option<&Request> {
        self.get(&id)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("request {0}: {1}")]
    Request(RequestId, &'static str),
    #[error("vehicle {0}: {1}")]
    Vehicle(VehicleId, &'static str),
    #[error("unknown request {0}")]
    UnknownRequest(RequestId),
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn budget_config(floor: Seconds, percent: f64) -> BatchConfig {
        BatchConfig { min_delay_floor: floor, delay_percent: percent, ..BatchConfig::default() }
    }

    #[test]
    fn one_hour_trip_gets_about_twenty_minutes() {
        assert_eq!(travel_delay_budget(3600, &budget_config(600, 0.33)), 1188);
    }

    #[test]
    fn floor_applies_to_zero_length_trip() {
        assert_eq!(travel_delay_budget(0, &budget_config(600, 0.33)), 600);
    }

    #[test]
    fn floor_wins_just_below_crossover() {
        // 1800 * 0.33 = 594 < 600
        assert_eq!(travel_delay_budget(1800, &budget_config(600, 0.33)), 600);
    }

    #[test]
    fn default_budget_is_thirty_minutes() {
        let config = BatchConfig::default();
        assert_eq!(travel_delay_budget(0, &config), 1800);
        assert_eq!(travel_delay_budget(7200, &config), 1800);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_seconds(2.5), 3);
        assert_eq!(round_seconds(2.49), 2);
        assert_eq!(round_seconds(0.0), 0);
    }

    #[test]
    fn candidate_count_prefers_absolute_setting() {
        let mut config = BatchConfig::default();
        assert_eq!(config.candidates_for(100), 10);
        assert_eq!(config.candidates_for(5), 1);
        config.candidates_per_request = Some(3);
        assert_eq!(config.candidates_for(100), 3);
    }

    #[test]
    fn config_validation_rejects_bad_lambda() {
        let config = BatchConfig { lambda: 1.5, ..BatchConfig::default() };
        assert!(config.validate().is_err());
        assert!(BatchConfig::default().validate().is_ok());
    }

    #[test]
    fn new_request_satisfies_its_invariants() {
        let config = BatchConfig::default();
        let r = Request::new(RequestId(4), 100, Location::new(0.0, 0.0), Location::new(300.0, 400.0), 2, &config);
        assert_eq!(r.direct_travel_time, 50);
        assert_eq!(r.pickup_deadline, 1900);
        r.validate(&config).unwrap();
        let mut broken = r.clone();
        broken.direct_travel_time = 49;
        assert!(broken.validate(&config).is_err());
    }

    #[test]
    fn slice_lookup_falls_back_to_scan() {
        let config = BatchConfig::default();
        let r = Request::new(RequestId(7), 0, Location::default(), Location::new(10.0, 0.0), 1, &config);
        let v = vec![r];
        assert_eq!(v.request(RequestId(7)).unwrap().id, RequestId(7));
        assert!(v.request(RequestId(0)).is_none());
    }

    proptest! {
        #[test]
        fn budget_is_monotone_and_floored(
            a in 0i64..200_000,
            b in 0i64..200_000,
            floor in 0i64..5_000,
            percent in 0.0f64..2.0,
        ) {
            let config = budget_config(floor, percent);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(travel_delay_budget(lo, &config) <= travel_delay_budget(hi, &config));
            prop_assert!(travel_delay_budget(lo, &config) >= floor);
        }
    }
}

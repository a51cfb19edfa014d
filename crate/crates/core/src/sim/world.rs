use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assign::{build_candidate_graph, greedy_assign, greedy_delay_check, ia_assign};
use crate::geometry::SpatialIndex;
use crate::model::{Location, Request, RequestId, RequestState, RoutePlan, Seconds, StopKind, Vehicle, VehicleId};

use super::demand::generate_demand;
use super::metrics::{mean, Accumulator, MetricsReport, MetricsRow};
use super::{Scenario, SimError, Strategy};

/// Realized service times of one request.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RideRecord {
    pub vehicle: Option<VehicleId>,
    pub pickup: Option<Seconds>,
    pub dropoff: Option<Seconds>,
}

/// A completed pickup or dropoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopEvent {
    pub time: Seconds,
    pub vehicle: VehicleId,
    pub request: RequestId,
    pub kind: StopKind,
}

/// Straight-line leg a vehicle is currently driving.
#[derive(Debug, Clone, Copy)]
struct Leg {
    origin: Location,
    start: Seconds,
}

/// Fleet and request state advancing in simulated time.
///
/// Vehicles drive straight lines at constant speed and reach each stop at
/// exactly its planned ETA, so realized times match the committed plan.
#[derive(Debug)]
pub struct World {
    scenario: Scenario,
    now: Seconds,
    requests: Vec<Request>,
    fleet: Vec<Vehicle>,
    legs: Vec<Leg>,
    next_arrival: usize,
    pending: BTreeSet<RequestId>,
    retry_at: BTreeMap<RequestId, Seconds>,
    next_batch: Seconds,
    records: Vec<RideRecord>,
    events: Vec<StopEvent>,
    acc: Accumulator,
}

/// Initial vehicle positions, uniform over the area and independent of the
/// demand stream.
fn initial_fleet(scenario: &Scenario) -> Vec<Vehicle> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed ^ 0xF1EE7);
    let a = scenario.area;
    (0..scenario.fleet_size)
        .map(|i| {
            let at = Location::new(rng.random_range(a.min_x..a.max_x), rng.random_range(a.min_y..a.max_y));
            Vehicle::idle(VehicleId(i as u32), scenario.vehicle_capacity, at, 0)
        })
        .collect()
}

impl World {
    /// `demand` must be ordered by submit time with ids equal to positions.
    pub fn new(scenario: Scenario, demand: Vec<Request>) -> Result<Self, SimError> {
        scenario.validate()?;
        for (i, r) in demand.iter().enumerate() {
            if r.id != RequestId(i as u32) {
                return Err(SimError::Config(format!("request at position {i} has id {}", r.id)));
            }
            r.validate(&scenario.batch)?;
        }
        if demand.windows(2).any(|w| w[0].submit_time > w[1].submit_time) {
            return Err(SimError::Config("requests must be ordered by submit time".into()));
        }
        let fleet = initial_fleet(&scenario);
        Ok(Self::with_fleet(scenario, demand, fleet))
    }

    /// A world with an explicit fleet; vehicle ids must equal positions.
    pub fn with_fleet(scenario: Scenario, demand: Vec<Request>, fleet: Vec<Vehicle>) -> Self {
        debug_assert!(fleet.iter().enumerate().all(|(i, v)| v.id == VehicleId(i as u32)));
        let legs = fleet.iter().map(|v| Leg { origin: v.location, start: 0 }).collect();
        let records = vec![RideRecord::default(); demand.len()];
        let next_batch = scenario.batch.batch_period;
        Self {
            scenario,
            now: 0,
            requests: demand,
            fleet,
            legs,
            next_arrival: 0,
            pending: BTreeSet::new(),
            retry_at: BTreeMap::new(),
            next_batch,
            records,
            events: Vec::new(),
            acc: Accumulator::default(),
        }
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    pub fn fleet(&self) -> &[Vehicle] {
        &self.fleet
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn records(&self) -> &[RideRecord] {
        &self.records
    }

    pub fn events(&self) -> &[StopEvent] {
        &self.events
    }

    pub fn pending(&self) -> impl Iterator<Item = RequestId> + '_ {
        self.pending.iter().copied()
    }

    /// Replaces a vehicle's state at the current time. Seats and plan are
    /// taken from `vehicle`; the position stays where the vehicle is.
    /// Requests newly served by the plan should be passed in `assigned`.
    pub fn commit_vehicle(&mut self, mut vehicle: Vehicle, assigned: &[RequestId]) {
        let i = vehicle.id.0 as usize;
        self.close_leg(i, self.now);
        vehicle.location = self.fleet[i].location;
        self.legs[i] = Leg { origin: vehicle.location, start: self.now };
        self.fleet[i] = vehicle;
        for &r in assigned {
            self.mark_assigned(r, VehicleId(i as u32));
        }
    }

    fn mark_assigned(&mut self, r: RequestId, v: VehicleId) {
        self.requests[r.0 as usize].state = RequestState::Assigned;
        self.records[r.0 as usize].vehicle = Some(v);
        self.pending.remove(&r);
        self.retry_at.remove(&r);
    }

    fn onboard_riders(&self, i: usize) -> u32 {
        self.fleet[i].onboard.iter().map(|(r, _)| self.requests[r.0 as usize].party_size).sum()
    }

    /// Books the moving time of vehicle `i` from its leg start up to `until`.
    fn close_leg(&mut self, i: usize, until: Seconds) {
        if !self.fleet[i].route_plan.is_empty() {
            self.book_leg(i, until);
        }
    }

    fn book_leg(&mut self, i: usize, until: Seconds) {
        let riders = self.onboard_riders(i);
        self.acc.add_leg(self.legs[i].start, until, riders);
        self.legs[i].start = until;
    }

    /// Moves the clock forward by `dt`, completing every stop that falls due.
    pub fn step(&mut self, dt: Seconds) -> Result<(), SimError> {
        debug_assert!(dt > 0);
        self.advance_to(self.now + dt)
    }

    fn advance_to(&mut self, t: Seconds) -> Result<(), SimError> {
        let first_event = self.events.len();
        for i in 0..self.fleet.len() {
            while let Some(stop) = self.fleet[i].route_plan.stops.first().cloned() {
                if stop.eta > t {
                    break;
                }
                self.close_leg(i, stop.eta);
                let r = stop.request_id.0 as usize;
                let party = self.requests[r].party_size;
                match stop.kind {
                    StopKind::Pickup => {
                        if self.onboard_riders(i) + party > self.fleet[i].capacity {
                            return Err(SimError::Invariant(format!("vehicle {} over capacity", self.fleet[i].id)));
                        }
                        self.fleet[i].onboard.push((stop.request_id, stop.eta));
                        self.records[r].pickup = Some(stop.eta);
                    }
                    StopKind::Dropoff => {
                        self.fleet[i].onboard.retain(|(id, _)| *id != stop.request_id);
                        self.fleet[i].seats_available += party;
                        self.records[r].dropoff = Some(stop.eta);
                        self.requests[r].state = RequestState::Served;
                    }
                }
                let vehicle = &mut self.fleet[i];
                vehicle.route_plan.stops.remove(0);
                vehicle.location = stop.location;
                self.legs[i] = Leg { origin: stop.location, start: stop.eta };
                self.events.push(StopEvent {
                    time: stop.eta,
                    vehicle: vehicle.id,
                    request: stop.request_id,
                    kind: stop.kind,
                });
                if self.scenario.strategy == Strategy::Greedy {
                    greedy_delay_check(&mut self.fleet[i], &self.requests, &self.scenario.batch)?;
                }
            }
            let leg = self.legs[i];
            let vehicle = &mut self.fleet[i];
            if let Some(next) = vehicle.route_plan.stops.first() {
                let span = (next.eta - leg.start) as f64;
                let progress = if span > 0.0 { (t - leg.start) as f64 / span } else { 1.0 };
                vehicle.location = leg.origin.lerp(&next.location, progress.clamp(0.0, 1.0));
                vehicle.route_plan.rebase(t);
            } else {
                vehicle.route_plan = RoutePlan::empty(t);
            }
        }
        self.events[first_event..].sort_by_key(|e| (e.time, e.vehicle));
        self.now = t;
        Ok(())
    }

    fn admit_arrivals(&mut self) {
        while let Some(r) = self.requests.get(self.next_arrival) {
            if r.submit_time > self.now {
                break;
            }
            self.pending.insert(r.id);
            if self.scenario.strategy == Strategy::Greedy {
                self.retry_at.insert(r.id, r.submit_time);
            }
            self.next_arrival += 1;
        }
    }

    fn expire(&mut self, r: RequestId) {
        self.requests[r.0 as usize].state = RequestState::Expired;
        self.pending.remove(&r);
        self.retry_at.remove(&r);
    }

    /// One batch: every pending request is offered to the iterative
    /// assignment; those left over stay pending only if the next batch still
    /// closes by their pickup deadline.
    pub fn run_batch(&mut self) -> Result<(), SimError> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let started = Instant::now();
        let config = &self.scenario.batch;
        let batch: Vec<Request> = self.pending.iter().map(|r| self.requests[r.0 as usize].clone()).collect();
        let index = SpatialIndex::from_fleet(&self.fleet, config.metric);
        let (graph, _) = build_candidate_graph(&batch, &self.fleet, &index, &self.requests, config, self.now)?;
        let outcome = ia_assign(graph, config)?;
        if self.scenario.report_cpu {
            self.acc.cpu_seconds += started.elapsed().as_secs_f64();
            self.acc.cpu_batches += 1;
        }

        let mut by_vehicle: BTreeMap<VehicleId, Vec<RequestId>> = BTreeMap::new();
        for (r, v) in outcome.matching.pairs() {
            by_vehicle.entry(v).or_default().push(r);
        }
        for vehicle in outcome.vehicles {
            let assigned = by_vehicle.remove(&vehicle.id).unwrap_or_default();
            self.commit_vehicle(vehicle, &assigned);
        }
        let next_close = self.now + self.scenario.batch.batch_period;
        let overdue: Vec<RequestId> =
            self.pending.iter().copied().filter(|r| next_close > self.requests[r.0 as usize].pickup_deadline).collect();
        for r in overdue {
            self.expire(r);
        }
        Ok(())
    }

    /// Offers every request due for a (re)try to the greedy dispatcher.
    fn dispatch_greedy(&mut self) -> Result<(), SimError> {
        let due: Vec<RequestId> = self.retry_at.iter().filter(|(_, t)| **t <= self.now).map(|(r, _)| *r).collect();
        if due.is_empty() {
            return Ok(());
        }
        let started = Instant::now();
        let index = SpatialIndex::from_fleet(&self.fleet, self.scenario.batch.metric);
        for r in due {
            let request = self.requests[r.0 as usize].clone();
            if self.now > request.pickup_deadline {
                self.expire(r);
                continue;
            }
            let idle: Vec<bool> = self.fleet.iter().map(|v| v.route_plan.is_empty()).collect();
            let chosen =
                greedy_assign(&request, &mut self.fleet, &index, &self.requests, &self.scenario.batch, self.now)?;
            match chosen {
                Some(v) => {
                    // The dispatcher has already swapped in the new plan, so
                    // book the interrupted leg by hand.
                    let i = v.0 as usize;
                    if !idle[i] {
                        self.book_leg(i, self.now);
                    }
                    self.legs[i] = Leg { origin: self.fleet[i].location, start: self.now };
                    self.mark_assigned(r, v);
                }
                None => {
                    let next = self.now + self.scenario.greedy_retry_period;
                    if self.now >= request.pickup_deadline {
                        self.expire(r);
                    } else {
                        self.retry_at.insert(r, next.min(request.pickup_deadline));
                    }
                }
            }
        }
        if self.scenario.report_cpu {
            self.acc.cpu_seconds += started.elapsed().as_secs_f64();
            self.acc.cpu_batches += 1;
        }
        Ok(())
    }

    fn all_idle(&self) -> bool {
        self.fleet.iter().all(|v| v.route_plan.is_empty())
    }

    fn finished(&self) -> bool {
        self.now >= self.scenario.horizon
            && self.next_arrival == self.requests.len()
            && self.pending.is_empty()
            && self.all_idle()
    }

    fn next_target(&self) -> Seconds {
        let mut target = self.now + self.scenario.time_step;
        match self.scenario.strategy {
            Strategy::Ia => target = target.min(self.next_batch),
            Strategy::Greedy => {
                if let Some(r) = self.requests.get(self.next_arrival) {
                    target = target.min(r.submit_time);
                }
                if let Some(t) = self.retry_at.values().min() {
                    target = target.min(*t);
                }
            }
        }
        target.max(self.now + 1)
    }

    /// Runs until every request is served or expired and the fleet is idle.
    pub fn run_to_end(&mut self) -> Result<(), SimError> {
        let limit = self.scenario.horizon + 2 * 86_400;
        self.admit_arrivals();
        if self.scenario.strategy == Strategy::Greedy {
            self.dispatch_greedy()?;
        }
        while !self.finished() {
            if self.now > limit {
                return Err(SimError::Invariant("the fleet did not drain after the horizon".into()));
            }
            let target = self.next_target();
            self.advance_to(target)?;
            self.admit_arrivals();
            match self.scenario.strategy {
                Strategy::Ia => {
                    if self.now == self.next_batch {
                        self.run_batch()?;
                        self.next_batch += self.scenario.batch.batch_period;
                    }
                }
                Strategy::Greedy => self.dispatch_greedy()?,
            }
        }
        if let Some(r) = self.requests.iter().find(|r| !matches!(r.state, RequestState::Served | RequestState::Expired))
        {
            return Err(SimError::Invariant(format!("request {} ended in state {:?}", r.id, r.state)));
        }
        Ok(())
    }

    pub fn report(&self) -> MetricsReport {
        let s = &self.scenario;
        let served: Vec<(&Request, &RideRecord)> =
            self.requests.iter().zip(&self.records).filter(|(_, rec)| rec.dropoff.is_some()).collect();
        let n = self.requests.len();
        let vht = self.acc.total_vehicle_seconds() / 3600.0;
        let moving = self.acc.total_vehicle_seconds();
        let hours = ((s.horizon + 3599) / 3600) as usize;
        let (occupancy_series, time_spent_series) = self.acc.series(hours);
        let minutes = |from: Seconds, to: Option<Seconds>| (to.unwrap_or(from) - from) as f64 / 60.0;
        let row = MetricsRow {
            strategy: s.strategy,
            fleet_size: s.fleet_size,
            candidates: s.batch.candidates_for(s.fleet_size),
            lambda: s.batch.lambda,
            batch_period: s.batch.batch_period,
            seed: s.seed,
            requests: n,
            served: served.len(),
            served_pct: if n > 0 { 100.0 * served.len() as f64 / n as f64 } else { 0.0 },
            vht,
            travel_per_request: if served.is_empty() { 0.0 } else { vht * 60.0 / served.len() as f64 },
            journey_time: mean(served.iter().map(|(r, rec)| minutes(r.submit_time, rec.dropoff))),
            wait_time: mean(served.iter().map(|(r, rec)| minutes(r.submit_time, rec.pickup))),
            avg_occupancy: if moving > 0.0 { self.acc.total_rider_seconds() / moving } else { 0.0 },
            cpu_per_batch: if self.acc.cpu_batches > 0 {
                self.acc.cpu_seconds / self.acc.cpu_batches as f64
            } else {
                0.0
            },
        };
        MetricsReport { row, occupancy_series, time_spent_series }
    }
}

/// Generates the scenario's demand and simulates it.
pub fn run(scenario: &Scenario) -> Result<MetricsReport, SimError> {
    scenario.validate()?;
    run_with_demand(scenario, generate_demand(scenario))
}

/// Simulates a given request list. Requests are ordered by submit time (then
/// id) and renumbered to their positions.
pub fn run_with_demand(scenario: &Scenario, mut demand: Vec<Request>) -> Result<MetricsReport, SimError> {
    demand.sort_by_key(|r| (r.submit_time, r.id));
    for (i, r) in demand.iter_mut().enumerate() {
        r.id = RequestId(i as u32);
        r.state = RequestState::Pending;
    }
    let mut world = World::new(scenario.clone(), demand)?;
    world.run_to_end()?;
    Ok(world.report())
}

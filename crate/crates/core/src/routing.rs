//! Route plans built by the nearest-neighbor stop ordering, and the per-edge
//! costs derived from them.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{distance_key, travel_time_with};
use crate::model::{
    BatchConfig, Location, Metric, Request, RequestId, RequestLookup, RoutePlan, Seconds, Stop, StopKind, Vehicle,
    VehicleId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("unknown request {0}")]
    UnknownRequest(RequestId),
    #[error("dropoff for {0} without a pickup while the rider is not on board")]
    UnpairedDropoff(RequestId),
    #[error("pickup for {0} without a matching dropoff")]
    MissingDropoff(RequestId),
    #[error("request {0} appears more than once in the stop set")]
    DuplicateStop(RequestId),
    #[error("pickup for {0} but the rider is already on board")]
    PickupForOnboard(RequestId),
    #[error("no stop of vehicle {0} is reachable without exceeding its capacity")]
    CapacityDeadlock(VehicleId),
}

/// A request-vehicle pair with its insertion and delay costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEdge {
    pub request_id: RequestId,
    pub vehicle_id: VehicleId,
    /// Extra travel time of the candidate plan over the vehicle's current
    /// plan. May be negative when the new ordering shortens existing legs.
    pub insertion_cost: Seconds,
    /// Largest rider delay on the candidate plan.
    pub max_delay_cost: Seconds,
    pub blended_cost: f64,
    pub candidate_plan: RoutePlan,
}

pub fn blended_cost(insertion: f64, delay: f64, lambda: f64) -> f64 {
    lambda * insertion + (1.0 - lambda) * delay
}

fn lookup(requests: &dyn RequestLookup, id: RequestId) -> Result<&Request, RoutingError> {
    requests.request(id).ok_or(RoutingError::UnknownRequest(id))
}

/// Orders `stops` greedily: from the vehicle's location, repeatedly drive to
/// the closest stop that is eligible (a dropoff only once its rider is on
/// board, a pickup only if the party fits). ETAs start at `now`.
pub fn plan_route(
    vehicle: &Vehicle,
    stops: &[Stop],
    requests: &dyn RequestLookup,
    config: &BatchConfig,
    now: Seconds,
) -> Result<RoutePlan, RoutingError> {
    let mut seen: BTreeMap<RequestId, (u32, u32)> = BTreeMap::new();
    for stop in stops {
        let entry = seen.entry(stop.request_id).or_default();
        match stop.kind {
            StopKind::Pickup => entry.0 += 1,
            StopKind::Dropoff => entry.1 += 1,
        }
    }
    for (&id, &(pickups, dropoffs)) in &seen {
        if pickups > 1 || dropoffs > 1 {
            return Err(RoutingError::DuplicateStop(id));
        }
        let onboard = vehicle.is_onboard(id);
        match (onboard, pickups, dropoffs) {
            (true, 1, _) => return Err(RoutingError::PickupForOnboard(id)),
            (false, 0, _) => return Err(RoutingError::UnpairedDropoff(id)),
            (_, _, 0) => return Err(RoutingError::MissingDropoff(id)),
            _ => {}
        }
    }
    for (id, _) in &vehicle.onboard {
        if !seen.contains_key(id) {
            return Err(RoutingError::MissingDropoff(*id));
        }
    }

    let mut load: u32 = 0;
    for (id, _) in &vehicle.onboard {
        load += lookup(requests, *id)?.party_size;
    }
    let mut parties = Vec::with_capacity(stops.len());
    for stop in stops {
        parties.push(lookup(requests, stop.request_id)?.party_size);
    }

    let mut remaining: Vec<usize> = (0..stops.len()).collect();
    let mut picked: Vec<RequestId> = Vec::new();
    let mut position = vehicle.location;
    let mut clock = now;
    let mut ordered = Vec::with_capacity(stops.len());
    while !remaining.is_empty() {
        let mut best: Option<(f64, RequestId, StopKind, usize)> = None;
        for (slot, &i) in remaining.iter().enumerate() {
            let stop = &stops[i];
            let eligible = match stop.kind {
                StopKind::Pickup => load + parties[i] <= vehicle.capacity,
                StopKind::Dropoff => vehicle.is_onboard(stop.request_id) || picked.contains(&stop.request_id),
            };
            if !eligible {
                continue;
            }
            let key = (distance_key(&position, &stop.location, config.metric), stop.request_id, stop.kind);
            let better = match &best {
                None => true,
                Some((d, id, kind, _)) => key.0.total_cmp(d).then(key.1.cmp(id)).then(key.2.cmp(kind)).is_lt(),
            };
            if better {
                best = Some((key.0, key.1, key.2, slot));
            }
        }
        let Some((_, _, _, slot)) = best else {
            return Err(RoutingError::CapacityDeadlock(vehicle.id));
        };
        let i = remaining.remove(slot);
        let stop = &stops[i];
        match stop.kind {
            StopKind::Pickup => {
                load += parties[i];
                picked.push(stop.request_id);
            }
            StopKind::Dropoff => load -= parties[i],
        }
        clock += travel_time_with(&position, &stop.location, config.metric, config.speed);
        position = stop.location;
        ordered.push(Stop { eta: clock, ..stop.clone() });
    }
    Ok(RoutePlan { stops: ordered, start_time: now, total_duration: clock - now })
}

/// Recomputes ETAs along the plan's existing order from `start` at `now`
/// under the given metric and speed.
pub fn retime(plan: &RoutePlan, start: &Location, now: Seconds, metric: Metric, speed: f64) -> RoutePlan {
    let mut position = *start;
    let mut clock = now;
    let stops = plan
        .stops
        .iter()
        .map(|stop| {
            clock += travel_time_with(&position, &stop.location, metric, speed);
            position = stop.location;
            Stop { eta: clock, ..stop.clone() }
        })
        .collect();
    RoutePlan { stops, start_time: now, total_duration: clock - now }
}

/// Extra travel time for `vehicle` to also serve `request`, together with
/// the plan that serves it.
pub fn insertion_cost(
    vehicle: &Vehicle,
    request: &Request,
    requests: &dyn RequestLookup,
    config: &BatchConfig,
    now: Seconds,
) -> Result<(Seconds, RoutePlan), RoutingError> {
    if vehicle.route_plan.stops.iter().any(|s| s.request_id == request.id) || vehicle.is_onboard(request.id) {
        return Err(RoutingError::DuplicateStop(request.id));
    }
    let mut stops = vehicle.route_plan.stops.clone();
    stops.push(Stop::pickup(request));
    stops.push(Stop::dropoff(request));
    let plan = plan_route(vehicle, &stops, requests, config, now)?;
    Ok((plan.total_duration - vehicle.route_plan.total_duration, plan))
}

/// Delay of one rider dropped off at `dropoff_eta`, floored at zero.
pub fn rider_delay(request: &Request, dropoff_eta: Seconds) -> Seconds {
    (dropoff_eta - request.submit_time - request.direct_travel_time).max(0)
}

/// Largest rider delay (wait plus in-vehicle excess over the direct trip)
/// among all riders dropped off on `plan`.
pub fn max_delay(plan: &RoutePlan, requests: &dyn RequestLookup) -> Result<Seconds, RoutingError> {
    let mut worst = 0;
    for stop in plan.stops.iter().filter(|s| s.kind == StopKind::Dropoff) {
        worst = worst.max(rider_delay(lookup(requests, stop.request_id)?, stop.eta));
    }
    Ok(worst)
}

/// Whether `vehicle` can take `request` using `plan`: the party fits, and
/// every pickup deadline and delay budget on the plan holds (inclusive).
pub fn edge_feasible(
    vehicle: &Vehicle,
    request: &Request,
    plan: &RoutePlan,
    requests: &dyn RequestLookup,
) -> Result<bool, RoutingError> {
    if request.party_size > vehicle.seats_available {
        return Ok(false);
    }
    plan_within_limits(plan, requests)
}

/// Whether every pickup and dropoff on `plan` meets its rider's limits.
pub fn plan_within_limits(plan: &RoutePlan, requests: &dyn RequestLookup) -> Result<bool, RoutingError> {
    for stop in &plan.stops {
        let rider = lookup(requests, stop.request_id)?;
        let ok = match stop.kind {
            StopKind::Pickup => stop.eta <= rider.pickup_deadline,
            StopKind::Dropoff => rider_delay(rider, stop.eta) <= rider.travel_delay_budget,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Builds the candidate edge for (request, vehicle), or `None` when the pair
/// is infeasible.
pub fn evaluate_edge(
    vehicle: &Vehicle,
    request: &Request,
    requests: &dyn RequestLookup,
    config: &BatchConfig,
    now: Seconds,
) -> Result<Option<CandidateEdge>, RoutingError> {
    if request.party_size > vehicle.seats_available {
        return Ok(None);
    }
    let (insertion, plan) = insertion_cost(vehicle, request, requests, config, now)?;
    if !edge_feasible(vehicle, request, &plan, requests)? {
        return Ok(None);
    }
    let delay = max_delay(&plan, requests)?;
    Ok(Some(CandidateEdge {
        request_id: request.id,
        vehicle_id: vehicle.id,
        insertion_cost: insertion,
        max_delay_cost: delay,
        blended_cost: blended_cost(insertion as f64, delay as f64, config.lambda),
        candidate_plan: plan,
    }))
}

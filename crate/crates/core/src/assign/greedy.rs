use crate::geometry::SpatialIndex;
use crate::model::{
    BatchConfig, Location, Metric, Request, RequestLookup, Seconds, Stop, StopKind, Vehicle, VehicleId,
};
use crate::routing::{plan_route, retime, rider_delay, RoutingError};

/// Angle in degrees between the directions from `from` to `a` and from
/// `from` to `b`. A zero-length direction counts as aligned.
pub fn direction_angle(from: &Location, a: &Location, b: &Location) -> f64 {
    let (ax, ay) = (a.x - from.x, a.y - from.y);
    let (bx, by) = (b.x - from.x, b.y - from.y);
    if (ax == 0.0 && ay == 0.0) || (bx == 0.0 && by == 0.0) {
        return 0.0;
    }
    let cross = ax * by - ay * bx;
    let dot = ax * bx + ay * by;
    cross.atan2(dot).abs().to_degrees()
}

/// Real-time dispatch of one request.
///
/// Vehicles are tried nearest first, skipping those that are not accepting
/// or lack seats. A busy vehicle must be heading roughly toward the
/// request's destination (within `angle_threshold` of the line to its last
/// stop). For any vehicle the reordered plan, timed on straight-line legs,
/// must reach every pending pickup by its deadline. The first vehicle that
/// passes takes the request and adopts the reordered plan.
///
/// `riders` must resolve the request and every rider committed to the
/// fleet. Returns the chosen vehicle, or `None` if every vehicle failed.
pub fn greedy_assign(
    request: &Request,
    fleet: &mut [Vehicle],
    index: &SpatialIndex,
    riders: &dyn RequestLookup,
    config: &BatchConfig,
    now: Seconds,
) -> Result<Option<VehicleId>, RoutingError> {
    let order = index.nearest(&request.origin, fleet.len(), |_| true);
    let position: std::collections::HashMap<VehicleId, usize> =
        fleet.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    for id in order {
        let Some(&slot) = position.get(&id) else { continue };
        let vehicle = &fleet[slot];
        if !vehicle.accepting || vehicle.seats_available < request.party_size {
            continue;
        }
        if let Some(last) = vehicle.route_plan.final_stop() {
            if direction_angle(&vehicle.location, &last.location, &request.destination) > config.angle_threshold {
                continue;
            }
        }
        let mut stops = vehicle.route_plan.stops.clone();
        stops.push(Stop::pickup(request));
        stops.push(Stop::dropoff(request));
        let plan = plan_route(vehicle, &stops, riders, config, now)?;
        let estimate = retime(&plan, &vehicle.location, now, Metric::Euclidean, config.speed);
        let mut pickups_ok = true;
        for stop in estimate.stops.iter().filter(|s| s.kind == StopKind::Pickup) {
            let rider = riders.request(stop.request_id).ok_or(RoutingError::UnknownRequest(stop.request_id))?;
            if stop.eta > rider.pickup_deadline {
                pickups_ok = false;
                break;
            }
        }
        if !pickups_ok {
            continue;
        }
        let vehicle = &mut fleet[slot];
        vehicle.seats_available -= request.party_size;
        vehicle.route_plan = plan;
        return Ok(Some(id));
    }
    Ok(None)
}

/// Stops a vehicle from accepting new requests once any rider's projected
/// delay reaches `greedy_delay_fraction` of their budget; an empty vehicle
/// accepts again.
pub fn greedy_delay_check(
    vehicle: &mut Vehicle,
    riders: &dyn RequestLookup,
    config: &BatchConfig,
) -> Result<(), RoutingError> {
    if vehicle.route_plan.is_empty() {
        vehicle.accepting = true;
        return Ok(());
    }
    for stop in vehicle.route_plan.stops.iter().filter(|s| s.kind == StopKind::Dropoff) {
        let rider = riders.request(stop.request_id).ok_or(RoutingError::UnknownRequest(stop.request_id))?;
        let projected = rider_delay(rider, stop.eta) as f64;
        if projected >= config.greedy_delay_fraction * rider.travel_delay_budget as f64 {
            vehicle.accepting = false;
            break;
        }
    }
    Ok(())
}

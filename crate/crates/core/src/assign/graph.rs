use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::SpatialIndex;
use crate::model::{BatchConfig, Request, RequestId, RequestLookup, Seconds, Vehicle, VehicleId};
use crate::routing::{evaluate_edge, CandidateEdge, RoutingError};

use super::{AssignError, Matching};

/// Bipartite request-vehicle graph for one batch.
///
/// Vehicles are held as snapshots that change as requests are committed to
/// them; `riders` holds every request a routing call may need to look up,
/// including riders already committed before the batch.
#[derive(Debug, Clone, Default)]
pub struct CandidateGraph {
    now: Seconds,
    riders: BTreeMap<RequestId, Request>,
    active: BTreeSet<RequestId>,
    vehicles: BTreeMap<VehicleId, Vehicle>,
    edges: BTreeMap<(RequestId, VehicleId), CandidateEdge>,
    by_request: BTreeMap<RequestId, BTreeSet<VehicleId>>,
    by_vehicle: BTreeMap<VehicleId, BTreeSet<RequestId>>,
}

impl CandidateGraph {
    pub fn new(now: Seconds) -> Self {
        Self { now, ..Self::default() }
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    /// Adds a request to R.
    pub fn add_request(&mut self, request: Request) {
        self.active.insert(request.id);
        self.riders.insert(request.id, request);
    }

    /// Makes a request known for routing without adding it to R.
    pub fn add_rider(&mut self, request: Request) {
        self.riders.insert(request.id, request);
    }

    pub fn add_vehicle(&mut self, vehicle: Vehicle) {
        self.vehicles.insert(vehicle.id, vehicle);
    }

    pub fn insert_edge(&mut self, edge: CandidateEdge) {
        let key = (edge.request_id, edge.vehicle_id);
        debug_assert!(self.active.contains(&key.0) && self.vehicles.contains_key(&key.1));
        self.by_request.entry(key.0).or_default().insert(key.1);
        self.by_vehicle.entry(key.1).or_default().insert(key.0);
        self.edges.insert(key, edge);
    }

    pub fn remove_edge(&mut self, request: RequestId, vehicle: VehicleId) -> Option<CandidateEdge> {
        let edge = self.edges.remove(&(request, vehicle))?;
        if let Some(set) = self.by_request.get_mut(&request) {
            set.remove(&vehicle);
            if set.is_empty() {
                self.by_request.remove(&request);
            }
        }
        if let Some(set) = self.by_vehicle.get_mut(&vehicle) {
            set.remove(&request);
            if set.is_empty() {
                self.by_vehicle.remove(&vehicle);
            }
        }
        Some(edge)
    }

    pub fn edge(&self, request: RequestId, vehicle: VehicleId) -> Option<&CandidateEdge> {
        self.edges.get(&(request, vehicle))
    }

    pub fn edges(&self) -> impl Iterator<Item = &CandidateEdge> {
        self.edges.values()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Requests still in R, ascending by id.
    pub fn requests(&self) -> impl Iterator<Item = &Request> {
        self.active.iter().map(|id| &self.riders[id])
    }

    pub fn request_count(&self) -> usize {
        self.active.len()
    }

    /// Vehicles with at least one edge, ascending by id.
    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        self.by_vehicle.keys().map(|id| &self.vehicles[id])
    }

    pub fn vehicle_count(&self) -> usize {
        self.by_vehicle.len()
    }

    /// Current snapshot of a vehicle, including ones that lost all edges.
    pub fn vehicle(&self, id: VehicleId) -> Option<&Vehicle> {
        self.vehicles.get(&id)
    }

    pub fn riders(&self) -> &BTreeMap<RequestId, Request> {
        &self.riders
    }

    pub fn request_degree(&self, request: RequestId) -> usize {
        self.by_request.get(&request).map_or(0, BTreeSet::len)
    }

    pub fn vehicle_degree(&self, vehicle: VehicleId) -> usize {
        self.by_vehicle.get(&vehicle).map_or(0, BTreeSet::len)
    }

    pub fn vehicles_of(&self, request: RequestId) -> impl Iterator<Item = VehicleId> + '_ {
        self.by_request.get(&request).into_iter().flatten().copied()
    }

    pub fn requests_of(&self, vehicle: VehicleId) -> impl Iterator<Item = RequestId> + '_ {
        self.by_vehicle.get(&vehicle).into_iter().flatten().copied()
    }

    /// Removes every request without edges from R and returns them.
    pub fn drop_isolated(&mut self) -> Vec<RequestId> {
        let isolated: Vec<RequestId> =
            self.active.iter().copied().filter(|r| !self.by_request.contains_key(r)).collect();
        for r in &isolated {
            self.active.remove(r);
        }
        isolated
    }

    /// Removes a request and all its edges from the graph.
    pub fn remove_request(&mut self, request: RequestId) {
        let vehicles: Vec<VehicleId> = self.vehicles_of(request).collect();
        for v in vehicles {
            self.remove_edge(request, v);
        }
        self.active.remove(&request);
    }

    /// Commits `request` to `vehicle` on their current edge: the vehicle
    /// adopts the edge's plan and gives up the party's seats, and the
    /// request leaves the graph.
    pub(crate) fn commit(
        &mut self,
        request: RequestId,
        vehicle: VehicleId,
        matching: &mut Matching,
    ) -> Result<(), AssignError> {
        let edge = self.edge(request, vehicle).cloned().ok_or(AssignError::UnknownRequest(request))?;
        let party = self.riders.get(&request).ok_or(AssignError::UnknownRequest(request))?.party_size;
        let snapshot = self.vehicles.get_mut(&vehicle).ok_or(AssignError::UnknownVehicle(vehicle))?;
        debug_assert!(party <= snapshot.seats_available);
        snapshot.seats_available -= party;
        snapshot.route_plan = edge.candidate_plan.clone();
        self.remove_request(request);
        matching.insert(edge);
        Ok(())
    }

    /// Re-evaluates every surviving edge of `vehicle` against its current
    /// snapshot, replacing costs and plans and dropping infeasible edges.
    pub(crate) fn refresh_vehicle(&mut self, vehicle: VehicleId, config: &BatchConfig) -> Result<(), RoutingError> {
        let requests: Vec<RequestId> = self.requests_of(vehicle).collect();
        for r in requests {
            let fresh = evaluate_edge(&self.vehicles[&vehicle], &self.riders[&r], &self.riders, config, self.now)?;
            match fresh {
                Some(edge) => {
                    self.edges.insert((r, vehicle), edge);
                }
                None => {
                    self.remove_edge(r, vehicle);
                }
            }
        }
        Ok(())
    }

    /// Rows and columns for the LP builders: requests in R with party sizes,
    /// vehicles with edges and their free seats, and blended edge costs.
    #[allow(clippy::type_complexity)]
    pub fn lp_parts(&self) -> (Vec<(RequestId, u32)>, Vec<(VehicleId, u32)>, Vec<(RequestId, VehicleId, f64)>) {
        let requests = self.requests().map(|r| (r.id, r.party_size)).collect();
        let vehicles = self.vehicles().map(|v| (v.id, v.seats_available)).collect();
        let edges = self.edges.values().map(|e| (e.request_id, e.vehicle_id, e.blended_cost)).collect();
        (requests, vehicles, edges)
    }
}

/// Builds the batch graph: each pending request is joined to those of its
/// `N` nearest vehicles with enough free seats that can serve it within its
/// pickup deadline and every affected rider's delay budget.
///
/// `riders` must resolve every request already committed to a fleet vehicle.
/// Vehicle plans are rebased to `now`. Requests left without any edge are
/// returned separately and are not part of R.
pub fn build_candidate_graph(
    pending: &[Request],
    fleet: &[Vehicle],
    index: &SpatialIndex,
    riders: &dyn RequestLookup,
    config: &BatchConfig,
    now: Seconds,
) -> Result<(CandidateGraph, Vec<RequestId>), AssignError> {
    let mut graph = CandidateGraph::new(now);
    let by_id: BTreeMap<VehicleId, &Vehicle> = fleet.iter().map(|v| (v.id, v)).collect();
    let k = config.candidates_for(fleet.len());
    for request in pending {
        graph.add_request(request.clone());
    }
    let mut excluded = Vec::new();
    for request in pending {
        let party = request.party_size;
        let near = index.nearest(&request.origin, k, |id| by_id.get(&id).is_some_and(|v| v.seats_available >= party));
        for vid in near {
            if !graph.vehicles.contains_key(&vid) {
                let mut snapshot = by_id[&vid].clone();
                snapshot.route_plan.rebase(now);
                for rid in snapshot.committed_requests() {
                    if !graph.riders.contains_key(&rid) {
                        let rider = riders.request(rid).ok_or(AssignError::UnknownRequest(rid))?;
                        graph.add_rider(rider.clone());
                    }
                }
                graph.add_vehicle(snapshot);
            }
            if let Some(edge) = evaluate_edge(&graph.vehicles[&vid], request, &graph.riders, config, now)? {
                graph.insert_edge(edge);
            }
        }
        if graph.request_degree(request.id) == 0 {
            excluded.push(request.id);
        }
    }
    for r in &excluded {
        graph.active.remove(r);
    }
    Ok((graph, excluded))
}

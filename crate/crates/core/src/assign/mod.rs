//! Batch assignment by iterative LP rounding, and the greedy real-time
//! dispatcher used as a baseline.

mod graph;
mod greedy;
mod ia;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lpsolve::LpError;
use crate::model::{RequestId, VehicleId};
use crate::routing::{CandidateEdge, RoutingError};

pub use graph::{build_candidate_graph, CandidateGraph};
pub use greedy::{direction_angle, greedy_assign, greedy_delay_check};
pub use ia::{ia_assign, reduce_graph, IaOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("iterative assignment did not finish within {bound} iterations")]
    NonTermination { bound: usize },
    #[error("unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
    #[error("unknown request {0}")]
    UnknownRequest(RequestId),
}

/// Committed request-vehicle pairs, each with the edge it was committed on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    pairs: BTreeMap<RequestId, CandidateEdge>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn insert(&mut self, edge: CandidateEdge) {
        let previous = self.pairs.insert(edge.request_id, edge);
        debug_assert!(previous.is_none(), "request matched twice");
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, request: RequestId) -> bool {
        self.pairs.contains_key(&request)
    }

    pub fn vehicle_of(&self, request: RequestId) -> Option<VehicleId> {
        self.pairs.get(&request).map(|e| e.vehicle_id)
    }

    /// `(request, vehicle)` pairs in request order.
    pub fn pairs(&self) -> impl Iterator<Item = (RequestId, VehicleId)> + '_ {
        self.pairs.values().map(|e| (e.request_id, e.vehicle_id))
    }

    /// The edges the pairs were committed on, with costs and plans as they
    /// stood at commit time.
    pub fn edges(&self) -> impl Iterator<Item = &CandidateEdge> {
        self.pairs.values()
    }

    pub fn total_blended_cost(&self) -> f64 {
        self.pairs.values().map(|e| e.blended_cost).sum()
    }
}

//! Batch ride-pooling assignment: candidate graphs, LP-rounding assignment,
//! a greedy real-time baseline and a fleet simulator.
//!
//! ```
//! use poolcore::assign::{build_candidate_graph, ia_assign};
//! use poolcore::geometry::SpatialIndex;
//! use poolcore::model::{BatchConfig, Location, Request, RequestId, Vehicle, VehicleId};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let config = BatchConfig { candidates_per_request: Some(5), ..BatchConfig::default() };
//! let pending = vec![Request::new(RequestId(0), 0, Location::new(0.0, 0.0), Location::new(3000.0, 0.0), 1, &config)];
//! let fleet = vec![Vehicle::idle(VehicleId(0), 4, Location::new(500.0, 0.0), 0)];
//! let index = SpatialIndex::from_fleet(&fleet, config.metric);
//! let (graph, _excluded) = build_candidate_graph(&pending, &fleet, &index, &pending, &config, 0)?;
//! let outcome = ia_assign(graph, &config)?;
//! assert_eq!(outcome.matching.vehicle_of(RequestId(0)), Some(VehicleId(0)));
//! # Ok(())
//! # }
//! ```

pub mod assign;
pub mod geometry;
pub mod lpsolve;
pub mod model;
pub mod routing;
pub mod sim;

pub use assign::{build_candidate_graph, greedy_assign, ia_assign, CandidateGraph, IaOutcome, Matching};
pub use geometry::{travel_time, SpatialIndex};
pub use lpsolve::{solve, LpProblem, LpSolution, LpStatus};
pub use model::{
    travel_delay_budget, BatchConfig, Location, Metric, Request, RequestId, RequestState, RoutePlan, Seconds, Stop,
    StopKind, Vehicle, VehicleId,
};
pub use routing::{plan_route, CandidateEdge};
pub use sim::{run, MetricsReport, Scenario, Strategy};

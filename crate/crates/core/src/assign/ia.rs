use std::collections::{BTreeMap, BTreeSet};

use crate::lpsolve::{build_lp, build_relaxed_lp, compute_big_m, solve, INTEGRALITY_TOL};
use crate::model::{BatchConfig, RequestId, Vehicle, VehicleId};

use super::{AssignError, CandidateGraph, Matching};

#[derive(Debug, Clone, PartialEq)]
pub struct IaOutcome {
    pub matching: Matching,
    /// Requests of the input graph that were never matched, ascending.
    pub unassigned: Vec<RequestId>,
    /// Final state of every vehicle that received at least one request.
    pub vehicles: Vec<Vehicle>,
    pub iterations: usize,
    /// Iterations in which LP(G) was infeasible and the graph was reduced.
    pub infeasible_iterations: usize,
}

/// Iterative assignment.
///
/// Each round solves LP(G) for a vertex solution. If it is infeasible, the
/// graph is first reduced to unit-party requests and the relaxed big-M
/// maximization is solved instead. Every vehicle with some `x = 1` takes
/// its cheapest such request; if there is none, all `x = 0` edges are
/// deleted. Edges of vehicles that changed are re-evaluated, isolated
/// requests leave R, and the loop runs until no edges remain.
pub fn ia_assign(mut graph: CandidateGraph, config: &BatchConfig) -> Result<IaOutcome, AssignError> {
    let initial: BTreeSet<RequestId> = graph.requests().map(|r| r.id).collect();
    let bound = graph.edge_count() + graph.request_count() + graph.vehicle_count();
    let mut matching = Matching::new();
    let mut touched: BTreeSet<VehicleId> = BTreeSet::new();
    let mut iterations = 0;
    let mut infeasible_iterations = 0;

    graph.drop_isolated();
    while graph.edge_count() > 0 {
        iterations += 1;
        if iterations > bound {
            return Err(AssignError::NonTermination { bound });
        }

        let problem = build_lp(&graph)?;
        let mut solution = solve(&problem)?;
        let mut problem = problem;
        if !solution.is_optimal() {
            infeasible_iterations += 1;
            touched.extend(reduce_graph(&mut graph, &mut matching, config)?);
            if graph.edge_count() == 0 {
                break;
            }
            problem = build_relaxed_lp(&graph, compute_big_m(&graph, config.big_m_epsilon))?;
            solution = solve(&problem)?;
        }

        let mut ones: BTreeMap<VehicleId, Vec<RequestId>> = BTreeMap::new();
        let mut zeros: Vec<(RequestId, VehicleId)> = Vec::new();
        for (column, &x) in problem.columns.iter().zip(&solution.values) {
            let r = problem.requests[column.request].id;
            let v = problem.vehicles[column.vehicle].id;
            if (x - 1.0).abs() <= INTEGRALITY_TOL {
                ones.entry(v).or_default().push(r);
            } else if x.abs() <= INTEGRALITY_TOL {
                zeros.push((r, v));
            }
        }

        let mut assigned_now = Vec::new();
        if ones.is_empty() {
            for (r, v) in zeros {
                graph.remove_edge(r, v);
            }
        } else {
            for (v, requests) in ones {
                let best = requests
                    .into_iter()
                    .filter_map(|r| graph.edge(r, v).map(|e| (e.blended_cost, r)))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                if let Some((_, r)) = best {
                    graph.commit(r, v, &mut matching)?;
                    assigned_now.push(v);
                }
            }
        }
        for &v in &assigned_now {
            graph.refresh_vehicle(v, config)?;
        }
        touched.extend(assigned_now);
        graph.drop_isolated();
    }

    let unassigned = initial.into_iter().filter(|r| !matching.contains(*r)).collect();
    let vehicles = touched.iter().filter_map(|v| graph.vehicle(*v).cloned()).collect();
    Ok(IaOutcome { matching, unassigned, vehicles, iterations, infeasible_iterations })
}

/// Reduces the graph to unit-party requests: requests with parties of two
/// or more are taken largest first (lower id on ties) and committed to their
/// cheapest remaining vehicle, or dropped if none is left. Returns the
/// vehicles that received a request.
pub fn reduce_graph(
    graph: &mut CandidateGraph,
    matching: &mut Matching,
    config: &BatchConfig,
) -> Result<Vec<VehicleId>, AssignError> {
    let mut multi: Vec<(u32, RequestId)> =
        graph.requests().filter(|r| r.party_size >= 2).map(|r| (r.party_size, r.id)).collect();
    multi.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut touched = Vec::new();
    for (_, r) in multi {
        let best = graph
            .vehicles_of(r)
            .filter_map(|v| graph.edge(r, v).map(|e| (e.blended_cost, v)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match best {
            Some((_, v)) => {
                graph.commit(r, v, matching)?;
                graph.refresh_vehicle(v, config)?;
                touched.push(v);
            }
            None => graph.remove_request(r),
        }
    }
    graph.drop_isolated();
    Ok(touched)
}

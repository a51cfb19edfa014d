mod common;

use std::collections::BTreeSet;

use common::*;
use poolcore::assign::{greedy_assign, ia_assign};
use poolcore::geometry::SpatialIndex;
use poolcore::lpsolve::{build_lp, solve};
use poolcore::model::{BatchConfig, RequestId};
use poolcore::routing::plan_within_limits;
use rand::Rng;

#[test]
fn every_request_is_matched_once_or_reported_unassigned() {
    let config = BatchConfig { candidates_per_request: Some(5), ..config() };
    let mut rng = rng(11);
    for _ in 0..60 {
        let nr = rng.random_range(1..=40);
        let nv = rng.random_range(1..=20);
        let pending = random_requests(&mut rng, nr, 0, 6000.0, 4, 0, &config);
        let fleet = idle_fleet(&mut rng, nv, 6000.0, 1..=4);
        let (graph, excluded) = graph_for(&pending, &fleet, &pending, &config, 0);
        let out = ia_assign(graph, &config).unwrap();

        let matched: BTreeSet<RequestId> = out.matching.pairs().map(|p| p.0).collect();
        let unassigned: BTreeSet<RequestId> = out.unassigned.iter().copied().collect();
        assert!(matched.is_disjoint(&unassigned));
        let mut all: BTreeSet<RequestId> = matched.union(&unassigned).copied().collect();
        all.extend(excluded);
        assert_eq!(all, pending.iter().map(|r| r.id).collect());

        let touched: BTreeSet<_> = out.vehicles.iter().map(|v| v.id).collect();
        for (r, v) in out.matching.pairs() {
            assert!(touched.contains(&v));
            let vehicle = out.vehicles.iter().find(|x| x.id == v).unwrap();
            assert!(vehicle.committed_requests().contains(&r));
        }
        for v in &out.vehicles {
            let party: u32 = v.committed_requests().iter().map(|r| pending[r.0 as usize].party_size).sum();
            assert_eq!(v.seats_available + party, v.capacity);
            assert!(plan_within_limits(&v.route_plan, &pending).unwrap());
        }
    }
}

#[test]
fn single_seat_batches_reach_the_exhaustive_optimum() {
    let config = BatchConfig { candidates_per_request: Some(4), ..config() };
    let mut rng = rng(12);
    let mut checked = 0;
    while checked < 200 {
        let (nr, nv) = (rng.random_range(1..=6), rng.random_range(1..=5));
        let pending = random_requests(&mut rng, nr, 0, 6000.0, 1, 0, &config);
        let fleet = idle_fleet(&mut rng, nv, 6000.0, 1..=1);
        let (graph, _) = graph_for(&pending, &fleet, &pending, &config, 0);
        if graph.edge_count() == 0 {
            continue;
        }
        let problem = build_lp(&graph).unwrap();
        if !solve(&problem).unwrap().is_optimal() {
            continue;
        }
        let best = brute_force(&problem).unwrap();
        let out = ia_assign(graph, &config).unwrap();
        assert!(out.unassigned.is_empty());
        assert_eq!(out.infeasible_iterations, 0);
        assert!((out.matching.total_blended_cost() - best).abs() <= 1e-6);
        checked += 1;
    }
}

#[test]
fn assignment_is_deterministic() {
    let config = BatchConfig { candidates_per_request: Some(6), ..config() };
    let mut rng = rng(13);
    let pending = random_requests(&mut rng, 80, 0, 8000.0, 4, 0, &config);
    let fleet = idle_fleet(&mut rng, 30, 8000.0, 2..=4);
    let first = ia_assign(graph_for(&pending, &fleet, &pending, &config, 0).0, &config).unwrap();
    for _ in 0..3 {
        let again = ia_assign(graph_for(&pending, &fleet, &pending, &config, 0).0, &config).unwrap();
        assert_eq!(again, first);
    }
}

#[test]
fn greedy_commits_keep_every_plan_within_limits() {
    let config = BatchConfig { candidates_per_request: Some(8), ..config() };
    let mut rng = rng(14);
    let mut fleet = idle_fleet(&mut rng, 15, 6000.0, 1..=4);
    let mut riders = Vec::new();
    for i in 0..120u32 {
        let now = i as i64 * 5;
        let request = random_requests(&mut rng, 1, i, 6000.0, 3, now, &config).remove(0);
        riders.push(request.clone());
        let index = SpatialIndex::from_fleet(&fleet, config.metric);
        if let Some(v) = greedy_assign(&request, &mut fleet, &index, &riders, &config, now).unwrap() {
            let vehicle = &fleet[v.0 as usize];
            assert!(vehicle.committed_requests().contains(&request.id));
            assert!(plan_within_limits(&vehicle.route_plan, &riders).unwrap());
            vehicle.validate(&riders).unwrap();
        }
    }
}

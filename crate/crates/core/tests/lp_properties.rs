mod common;

use common::*;
use poolcore::lpsolve::{
    big_m_from_edges, is_vertex, solve, Column, LpProblem, LpStatus, RequestRow, RowKind, Sense, VehicleRow,
};
use poolcore::model::{RequestId, VehicleId};
use rand::Rng;

#[test]
fn constraint_rows_follow_graph_degrees() {
    let mut rng = rng(1);
    for _ in 0..50 {
        let p = random_assignment_lp(&mut rng, 5, 4, 3);
        let rows = p.rows();
        assert_eq!(rows.len(), p.requests.len() + p.vehicles.len());
        for (i, row) in rows.iter().enumerate().take(p.requests.len()) {
            assert_eq!(row.len(), p.columns.iter().filter(|c| c.request == i).count());
            assert!(row.iter().all(|&(_, a)| a == 1.0));
        }
        for k in 0..p.vehicles.len() {
            let row = &rows[p.requests.len() + k];
            assert_eq!(row.len(), p.columns.iter().filter(|c| c.vehicle == k).count());
            for &(j, a) in row {
                assert_eq!(a, p.requests[p.columns[j].request].weight as f64);
            }
        }
    }
}

#[test]
fn solutions_are_feasible_vertices_at_the_oracle_optimum() {
    let mut rng = rng(2);
    let mut optimal = 0;
    for _ in 0..400 {
        let p = random_assignment_lp(&mut rng, 5, 4, 3);
        let s = solve(&p).unwrap();
        match (s.status, dense_simplex(&p)) {
            (LpStatus::Optimal, Some(best)) => {
                optimal += 1;
                assert!(p.is_feasible(&s.values, 1e-7));
                assert!((s.objective - best).abs() <= 1e-6, "{} vs {best}", s.objective);
                assert!((p.objective_value(&s.values) - s.objective).abs() <= 1e-6);
                assert!(s.is_vertex);
                assert!(is_vertex_by_rank(&p, &s.values));
            }
            (LpStatus::Infeasible, None) => {}
            other => panic!("solver and oracle disagree: {other:?}"),
        }
    }
    assert!(optimal > 100);
}

#[test]
fn negative_and_maximized_objectives_match_the_oracle() {
    let mut rng = rng(3);
    for _ in 0..200 {
        let mut p = random_assignment_lp(&mut rng, 5, 4, 1);
        for c in &mut p.columns {
            c.objective -= 500.0;
        }
        for r in &mut p.requests {
            r.kind = RowKind::AtMost;
        }
        for sense in [Sense::Minimize, Sense::Maximize] {
            p.sense = sense;
            let s = solve(&p).unwrap();
            let best = dense_simplex(&p).expect("at-most rows are always feasible");
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.objective - best).abs() <= 1e-6, "{sense:?}: {} vs {best}", s.objective);
            assert!(is_vertex_by_rank(&p, &s.values));
        }
    }
}

#[test]
fn interior_points_are_not_vertices() {
    let p = LpProblem {
        sense: Sense::Minimize,
        requests: vec![RequestRow { id: RequestId(0), kind: RowKind::Exactly, weight: 1 }],
        vehicles: vec![VehicleRow { id: VehicleId(0), capacity: 1 }, VehicleRow { id: VehicleId(1), capacity: 1 }],
        columns: vec![
            Column { request: 0, vehicle: 0, objective: 1.0 },
            Column { request: 0, vehicle: 1, objective: 1.0 },
        ],
    };
    assert!(!is_vertex(&p, &[0.5, 0.5]));
    assert!(!is_vertex_by_rank(&p, &[0.5, 0.5]));
    assert!(is_vertex(&p, &[1.0, 0.0]));
    assert!(is_vertex_by_rank(&p, &[1.0, 0.0]));
}

#[test]
fn big_m_exceeds_every_assignment_cost() {
    let mut rng = rng(4);
    for _ in 0..200 {
        let (_, _, edges) = random_unit_edges(&mut rng, 6, 4);
        let shift = rng.random_range(-100.0..100.0);
        let edges: Vec<_> = edges.into_iter().map(|(r, v, c)| (r, v, c + shift)).collect();
        let m = big_m_from_edges(edges.iter().map(|e| (e.0, e.2)), 1.0);
        let spread: f64 = edges.iter().map(|e| e.2.abs()).sum();
        assert!(m > 0.0);
        assert!(edges.iter().all(|e| m - e.2 > 0.0));
        assert!(m <= 2.0 * spread + 1.0 + 1e-9);
    }
}

#[test]
fn lp_format_names_every_variable_and_row() {
    let p = LpProblem::assignment(
        &[(RequestId(3), 1), (RequestId(5), 2)],
        &[(VehicleId(7), 4)],
        &[(RequestId(3), VehicleId(7), 12.5), (RequestId(5), VehicleId(7), 4.0)],
    )
    .unwrap();
    let text = p.to_lp_format();
    for needle in ["Minimize", "x_3_7", "x_5_7", "req_3", "req_5", "veh_7", "End"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

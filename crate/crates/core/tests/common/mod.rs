//! Independent oracles and instance generators shared by the integration
//! and acceptance tests.
#![allow(dead_code)]

use poolcore::assign::{build_candidate_graph, CandidateGraph};
use poolcore::geometry::SpatialIndex;
use poolcore::lpsolve::{Column, LpProblem, RequestRow, RowKind, Sense, VehicleRow};
use poolcore::model::{BatchConfig, Location, Request, RequestId, Vehicle, VehicleId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exhaustive search over integral assignments: each request takes one of
/// its columns (or none, for `<= 1` rows) subject to vehicle capacities.
/// Returns the optimal objective in the problem's sense, or `None` if no
/// integral assignment is feasible.
pub fn brute_force(problem: &LpProblem) -> Option<f64> {
    let nr = problem.requests.len();
    let mut options: Vec<Vec<Option<usize>>> = vec![Vec::new(); nr];
    for (i, row) in problem.requests.iter().enumerate() {
        if row.kind == RowKind::AtMost {
            options[i].push(None);
        }
    }
    for (j, c) in problem.columns.iter().enumerate() {
        options[c.request].push(Some(j));
    }
    let mut load = vec![0u64; problem.vehicles.len()];
    let mut best: Option<f64> = None;
    search(problem, &options, 0, &mut load, 0.0, &mut best);
    best
}

fn search(
    problem: &LpProblem,
    options: &[Vec<Option<usize>>],
    i: usize,
    load: &mut [u64],
    value: f64,
    best: &mut Option<f64>,
) {
    if i == options.len() {
        let better = match (*best, problem.sense) {
            (None, _) => true,
            (Some(b), Sense::Minimize) => value < b,
            (Some(b), Sense::Maximize) => value > b,
        };
        if better {
            *best = Some(value);
        }
        return;
    }
    for choice in &options[i] {
        match choice {
            None => search(problem, options, i + 1, load, value, best),
            Some(j) => {
                let c = &problem.columns[*j];
                let w = problem.requests[c.request].weight as u64;
                if load[c.vehicle] + w <= problem.vehicles[c.vehicle].capacity as u64 {
                    load[c.vehicle] += w;
                    search(problem, options, i + 1, load, value + c.objective, best);
                    load[c.vehicle] -= w;
                }
            }
        }
    }
}

/// Optimal value of the LP by a dense two-phase tableau simplex with
/// Bland's rule, or `None` when infeasible.
pub fn dense_simplex(problem: &LpProblem) -> Option<f64> {
    let n = problem.columns.len();
    let nr = problem.requests.len();
    let nv = problem.vehicles.len();
    let m = nr + nv;
    // Columns: structural, one slack per inequality row, one artificial per row.
    let slack_rows: Vec<usize> = (0..m).filter(|&i| i >= nr || problem.requests[i].kind == RowKind::AtMost).collect();
    let ns = slack_rows.len();
    let width = n + ns + m + 1;
    let mut t = vec![vec![0.0f64; width]; m];
    for (j, c) in problem.columns.iter().enumerate() {
        t[c.request][j] = 1.0;
        t[nr + c.vehicle][j] = problem.requests[c.request].weight as f64;
    }
    for (k, &i) in slack_rows.iter().enumerate() {
        t[i][n + k] = 1.0;
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[n + ns + i] = 1.0;
        row[width - 1] = if i < nr { 1.0 } else { problem.vehicles[i - nr].capacity as f64 };
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + ns + i).collect();

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = vec![0.0; width - 1];
    for c in cost1.iter_mut().skip(n + ns) {
        *c = 1.0;
    }
    run_phase(&mut t, &mut basis, &cost1, width - 1);
    let infeasibility: f64 = basis.iter().zip(&t).filter(|(b, _)| **b >= n + ns).map(|(_, row)| row[width - 1]).sum();
    if infeasibility > 1e-7 {
        return None;
    }
    // Drive degenerate artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n + ns {
            if let Some(j) = (0..n + ns).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    // Phase 2 over structural and slack columns only.
    let sign = if problem.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut cost2 = vec![0.0; width - 1];
    for (j, c) in problem.columns.iter().enumerate() {
        cost2[j] = sign * c.objective;
    }
    for c in cost2.iter_mut().skip(n + ns) {
        *c = f64::INFINITY;
    }
    run_phase(&mut t, &mut basis, &cost2, n + ns);
    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i][width - 1];
        }
    }
    Some(problem.columns.iter().zip(&x).map(|(c, v)| c.objective * v).sum())
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    basis[r] = c;
}

/// Minimizes `cost` over columns `< limit` with Bland's rule.
fn run_phase(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], limit: usize) {
    let rhs = t[0].len() - 1;
    loop {
        let cb: Vec<f64> = basis.iter().map(|&b| if cost[b].is_finite() { cost[b] } else { 0.0 }).collect();
        let entering = (0..limit).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let z: f64 = t.iter().zip(&cb).map(|(row, c)| row[j] * c).sum();
            cost[j] - z < -1e-9
        });
        let Some(j) = entering else { return };
        let mut leave: Option<(f64, usize, usize)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j] > 1e-9 {
                let ratio = row[rhs] / row[j];
                let key = (ratio, basis[i], i);
                if leave.is_none_or(|l| ratio < l.0 - 1e-12 || ((ratio - l.0).abs() <= 1e-12 && key.1 < l.1)) {
                    leave = Some(key);
                }
            }
        }
        let Some((_, _, r)) = leave else { return };
        pivot(t, basis, r, j);
    }
}

/// Rank of a dense matrix by Gaussian elimination with partial pivoting.
pub fn rank(mut rows: Vec<Vec<f64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else { break };
        if rows[p][c].abs() < 1e-9 {
            continue;
        }
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c] / pivot[c];
                if f != 0.0 {
                    for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                        *x -= f * p;
                    }
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Vertex test by rank: the support columns plus slack columns of
/// non-tight inequality rows must be linearly independent.
pub fn is_vertex_by_rank(problem: &LpProblem, x: &[f64]) -> bool {
    let nr = problem.requests.len();
    let m = nr + problem.vehicles.len();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut activity = vec![0.0; m];
    for (c, &v) in problem.columns.iter().zip(x) {
        let mut col = vec![0.0; m];
        col[c.request] = 1.0;
        col[nr + c.vehicle] = problem.requests[c.request].weight as f64;
        for (a, e) in activity.iter_mut().zip(&col) {
            *a += e * v;
        }
        if v > 1e-9 {
            columns.push(col);
        }
    }
    for i in 0..m {
        let (inequality, bound) = if i < nr {
            (problem.requests[i].kind == RowKind::AtMost, 1.0)
        } else {
            (true, problem.vehicles[i - nr].capacity as f64)
        };
        if inequality && bound - activity[i] > 1e-9 {
            let mut col = vec![0.0; m];
            col[i] = 1.0;
            columns.push(col);
        }
    }
    let count = columns.len();
    count == 0 || rank(columns) == count
}

/// Random LP(G) over `nr` requests and `nv` vehicles. Every edge satisfies
/// party <= seats; each request gets at least one edge when possible.
pub fn random_assignment_lp(rng: &mut impl Rng, max_r: usize, max_v: usize, max_party: u32) -> LpProblem {
    let nr = rng.random_range(1..=max_r);
    let nv = rng.random_range(1..=max_v);
    let requests: Vec<RequestRow> = (0..nr)
        .map(|i| RequestRow {
            id: RequestId(i as u32),
            kind: RowKind::Exactly,
            weight: rng.random_range(1..=max_party),
        })
        .collect();
    let vehicles: Vec<VehicleRow> =
        (0..nv).map(|k| VehicleRow { id: VehicleId(k as u32), capacity: rng.random_range(1..=4) }).collect();
    let density = rng.random_range(0.3..1.0);
    let mut columns = Vec::new();
    for (i, r) in requests.iter().enumerate() {
        for (k, v) in vehicles.iter().enumerate() {
            if r.weight <= v.capacity && rng.random::<f64>() < density {
                // Quarter-second costs keep objective sums exact.
                let objective = rng.random_range(0..4000) as f64 * 0.25;
                columns.push(Column { request: i, vehicle: k, objective });
            }
        }
    }
    if columns.is_empty() {
        columns.push(Column { request: 0, vehicle: 0, objective: 1.0 });
        let mut p = LpProblem { sense: Sense::Minimize, requests, vehicles, columns };
        p.requests[0].weight = 1;
        return p;
    }
    LpProblem { sense: Sense::Minimize, requests, vehicles, columns }
}

/// Unit-demand edge list with nonnegative costs, as `(requests, vehicles,
/// edges)` ready for the program builders.
#[allow(clippy::type_complexity)]
pub fn random_unit_edges(
    rng: &mut impl Rng,
    max_r: usize,
    max_v: usize,
) -> (Vec<(RequestId, u32)>, Vec<(VehicleId, u32)>, Vec<(RequestId, VehicleId, f64)>) {
    let nr = rng.random_range(1..=max_r);
    let nv = rng.random_range(1..=max_v);
    let requests: Vec<(RequestId, u32)> = (0..nr).map(|i| (RequestId(i as u32), 1)).collect();
    let vehicles: Vec<(VehicleId, u32)> = (0..nv).map(|k| (VehicleId(k as u32), rng.random_range(1..=4))).collect();
    let mut edges = Vec::new();
    for &(r, _) in &requests {
        let mut any = false;
        for &(v, _) in &vehicles {
            if rng.random::<f64>() < 0.6 {
                edges.push((r, v, rng.random_range(0..4000) as f64 * 0.25));
                any = true;
            }
        }
        if !any {
            let v = vehicles[rng.random_range(0..nv)].0;
            edges.push((r, v, rng.random_range(0..4000) as f64 * 0.25));
        }
    }
    (requests, vehicles, edges)
}

pub fn config() -> BatchConfig {
    BatchConfig { speed: 10.0, ..BatchConfig::default() }
}

pub fn random_location(rng: &mut impl Rng, size: f64) -> Location {
    Location::new(rng.random_range(0.0..size), rng.random_range(0.0..size))
}

/// Requests with random trips of at least 500 m, submitted at `submit`.
pub fn random_requests(
    rng: &mut impl Rng,
    count: usize,
    first_id: u32,
    size: f64,
    max_party: u32,
    submit: i64,
    config: &BatchConfig,
) -> Vec<Request> {
    (0..count)
        .map(|i| {
            let o = random_location(rng, size);
            let mut d = random_location(rng, size);
            while ((d.x - o.x).powi(2) + (d.y - o.y).powi(2)).sqrt() < 500.0 {
                d = random_location(rng, size);
            }
            let party = rng.random_range(1..=max_party);
            Request::new(RequestId(first_id + i as u32), submit, o, d, party, config)
        })
        .collect()
}

/// Idle vehicles at random positions with capacities in `seats`.
pub fn idle_fleet(rng: &mut impl Rng, count: usize, size: f64, seats: std::ops::RangeInclusive<u32>) -> Vec<Vehicle> {
    (0..count)
        .map(|k| {
            let at = random_location(rng, size);
            let cap = rng.random_range(seats.clone());
            Vehicle::idle(VehicleId(k as u32), cap, at, 0)
        })
        .collect()
}

/// Candidate graph over `pending` and `fleet` at time `now`. Riders are a
/// `Vec` because slices cannot stand in for the lookup trait object.
#[allow(clippy::ptr_arg)]
pub fn graph_for(
    pending: &[Request],
    fleet: &[Vehicle],
    riders: &Vec<Request>,
    config: &BatchConfig,
    now: i64,
) -> (CandidateGraph, Vec<RequestId>) {
    let index = SpatialIndex::from_fleet(fleet, config.metric);
    build_candidate_graph(pending, fleet, &index, riders, config, now).expect("graph builds")
}

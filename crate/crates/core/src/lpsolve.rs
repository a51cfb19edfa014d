//! The assignment relaxations and their solver.
//!
//! Both programs share one shape: a variable per request-vehicle edge, one
//! row per request (`= 1` or `<= 1`) and one capacity row per vehicle whose
//! coefficient on an edge is a per-request weight (the party size, or 1 in
//! the unit-demand variant). Substituting `y = weight * x` turns the system
//! into a transportation problem: each request ships `weight` units through
//! its edges into vehicles of capacity `seats`. Scaling columns maps basic
//! solutions to basic solutions, so a primal network simplex on the
//! transportation form returns extreme points of the original polytope.
//!
//! The simplex keeps a spanning tree rooted at a sink node. Feasibility and
//! optimality are handled in a single pass with lexicographic costs (number
//! of units on artificial arcs first, real cost second), and the leaving arc
//! follows the strongly-feasible-tree rule so degenerate pivots cannot
//! cycle. Entering arcs are chosen by largest violation; after a pivot
//! budget the rule falls back to lowest index.

use std::fmt::Write as _;

use thiserror::Error;

use crate::assign::CandidateGraph;
use crate::model::{RequestId, VehicleId};

/// A value within this distance of 0 or 1 counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Constraint satisfaction tolerance for reported solutions.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("the problem has no variables")]
    Empty,
    #[error("edge {index} refers to a missing row")]
    DanglingColumn { index: usize },
    #[error("request {0} has a party larger than the seats of one of its vehicles")]
    OversizedParty(RequestId),
    #[error("request {0} has a party of two or more; the relaxed program needs unit demand")]
    NonUnitParty(RequestId),
    #[error("request weights must be at least 1 (request {0})")]
    ZeroWeight(RequestId),
    #[error("objective coefficient of edge {index} is not finite")]
    NonFiniteCost { index: usize },
    #[error("the simplex exceeded its pivot limit of {0}")]
    PivotLimit(usize),
    #[error("unbounded pivot cycle")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `sum_v x_rv = 1`
    Exactly,
    /// `sum_v x_rv <= 1`
    AtMost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestRow {
    pub id: RequestId,
    pub kind: RowKind,
    /// Coefficient of this request's variables in vehicle rows.
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleRow {
    pub id: VehicleId,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub request: usize,
    pub vehicle: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub requests: Vec<RequestRow>,
    pub vehicles: Vec<VehicleRow>,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per column, in column order. All zero when infeasible.
    pub values: Vec<f64>,
    pub objective: f64,
    pub is_vertex: bool,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Edge list shared by the two program builders: requests with their party
/// sizes, vehicles with their free seats, and `(request, vehicle, cost)`.
struct Indexed {
    requests: Vec<(RequestId, u32)>,
    vehicles: Vec<(VehicleId, u32)>,
    columns: Vec<(usize, usize, f64)>,
}

fn index_edges(
    requests: &[(RequestId, u32)],
    vehicles: &[(VehicleId, u32)],
    edges: &[(RequestId, VehicleId, f64)],
) -> Result<Indexed, LpError> {
    if edges.is_empty() {
        return Err(LpError::Empty);
    }
    let req_pos: std::collections::HashMap<RequestId, usize> =
        requests.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    let veh_pos: std::collections::HashMap<VehicleId, usize> =
        vehicles.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    let mut columns = Vec::with_capacity(edges.len());
    for (index, (r, v, cost)) in edges.iter().enumerate() {
        let (Some(&ri), Some(&vi)) = (req_pos.get(r), veh_pos.get(v)) else {
            return Err(LpError::DanglingColumn { index });
        };
        columns.push((ri, vi, *cost));
    }
    Ok(Indexed { requests: requests.to_vec(), vehicles: vehicles.to_vec(), columns })
}

impl LpProblem {
    /// The assignment relaxation: minimize total cost with every request
    /// assigned exactly once and party-weighted seat limits.
    pub fn assignment(
        requests: &[(RequestId, u32)],
        vehicles: &[(VehicleId, u32)],
        edges: &[(RequestId, VehicleId, f64)],
    ) -> Result<Self, LpError> {
        let ix = index_edges(requests, vehicles, edges)?;
        for &(ri, vi, _) in &ix.columns {
            if ix.requests[ri].1 > ix.vehicles[vi].1 {
                return Err(LpError::OversizedParty(ix.requests[ri].0));
            }
        }
        let problem = LpProblem {
            sense: Sense::Minimize,
            requests: ix
                .requests
                .iter()
                .map(|&(id, party)| RequestRow { id, kind: RowKind::Exactly, weight: party })
                .collect(),
            vehicles: ix.vehicles.iter().map(|&(id, seats)| VehicleRow { id, capacity: seats }).collect(),
            columns: ix
                .columns
                .iter()
                .map(|&(request, vehicle, objective)| Column { request, vehicle, objective })
                .collect(),
        };
        problem.validate()?;
        Ok(problem)
    }

    /// The always-feasible unit-demand maximization with objective
    /// `(big_m - cost)` per edge and `<= 1` request rows.
    pub fn relaxed(
        requests: &[(RequestId, u32)],
        vehicles: &[(VehicleId, u32)],
        edges: &[(RequestId, VehicleId, f64)],
        big_m: f64,
    ) -> Result<Self, LpError> {
        if let Some((id, _)) = requests.iter().find(|(_, party)| *party >= 2) {
            return Err(LpError::NonUnitParty(*id));
        }
        let ix = index_edges(requests, vehicles, edges)?;
        let problem = LpProblem {
            sense: Sense::Maximize,
            requests: ix.requests.iter().map(|&(id, _)| RequestRow { id, kind: RowKind::AtMost, weight: 1 }).collect(),
            vehicles: ix.vehicles.iter().map(|&(id, seats)| VehicleRow { id, capacity: seats }).collect(),
            columns: ix
                .columns
                .iter()
                .map(|&(request, vehicle, cost)| Column { request, vehicle, objective: big_m - cost })
                .collect(),
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.columns.is_empty() {
            return Err(LpError::Empty);
        }
        if let Some(row) = self.requests.iter().find(|r| r.weight == 0) {
            return Err(LpError::ZeroWeight(row.id));
        }
        for (index, c) in self.columns.iter().enumerate() {
            if c.request >= self.requests.len() || c.vehicle >= self.vehicles.len() {
                return Err(LpError::DanglingColumn { index });
            }
            if !c.objective.is_finite() {
                return Err(LpError::NonFiniteCost { index });
            }
        }
        Ok(())
    }

    /// Sparse constraint rows: request rows first, then vehicle rows.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.requests.len() + self.vehicles.len()];
        for (j, c) in self.columns.iter().enumerate() {
            rows[c.request].push((j, 1.0));
            rows[self.requests.len() + c.vehicle].push((j, self.requests[c.request].weight as f64));
        }
        rows
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.columns.iter().zip(values).map(|(c, x)| c.objective * x).sum()
    }

    /// Whether `values` satisfies every row and bound within `tol`.
    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        if values.len() != self.columns.len() || values.iter().any(|x| *x < -tol) {
            return false;
        }
        let mut request_sum = vec![0.0; self.requests.len()];
        let mut load = vec![0.0; self.vehicles.len()];
        for (c, x) in self.columns.iter().zip(values) {
            request_sum[c.request] += x;
            load[c.vehicle] += self.requests[c.request].weight as f64 * x;
        }
        let requests_ok = self.requests.iter().zip(&request_sum).all(|(row, s)| match row.kind {
            RowKind::Exactly => (s - 1.0).abs() <= tol,
            RowKind::AtMost => *s <= 1.0 + tol,
        });
        requests_ok && self.vehicles.iter().zip(&load).all(|(row, l)| *l <= row.capacity as f64 + tol)
    }

    /// Writes the program in CPLEX LP text format, for cross-checking with
    /// external solvers.
    pub fn to_lp_format(&self) -> String {
        let name = |j: usize| {
            let c = &self.columns[j];
            format!("x_{}_{}", self.requests[c.request].id.0, self.vehicles[c.vehicle].id.0)
        };
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Minimize => "Minimize\n",
            Sense::Maximize => "Maximize\n",
        });
        out.push_str(" obj:");
        for (j, c) in self.columns.iter().enumerate() {
            let _ = write!(out, " {} {} {}", if c.objective < 0.0 { '-' } else { '+' }, c.objective.abs(), name(j));
        }
        out.push_str("\nSubject To\n");
        let rows = self.rows();
        for (i, row) in self.requests.iter().enumerate() {
            let _ = write!(out, " req_{}:", row.id.0);
            for &(j, _) in &rows[i] {
                let _ = write!(out, " + {}", name(j));
            }
            let op = if row.kind == RowKind::Exactly { "=" } else { "<=" };
            let _ = writeln!(out, " {op} 1");
        }
        for (k, row) in self.vehicles.iter().enumerate() {
            let entries = &rows[self.requests.len() + k];
            if entries.is_empty() {
                continue;
            }
            let _ = write!(out, " veh_{}:", row.id.0);
            for &(j, a) in entries {
                let _ = write!(out, " + {} {}", a, name(j));
            }
            let _ = writeln!(out, " <= {}", row.capacity);
        }
        out.push_str("End\n");
        out
    }
}

/// LP(G) over the edges of a candidate graph, using blended costs.
pub fn build_lp(graph: &CandidateGraph) -> Result<LpProblem, LpError> {
    let (requests, vehicles, edges) = graph.lp_parts();
    LpProblem::assignment(&requests, &vehicles, &edges)
}

/// The relaxed maximization over a unit-demand candidate graph.
pub fn build_relaxed_lp(graph: &CandidateGraph, big_m: f64) -> Result<LpProblem, LpError> {
    let (requests, vehicles, edges) = graph.lp_parts();
    LpProblem::relaxed(&requests, &vehicles, &edges, big_m)
}

/// Sum over requests of the largest incident edge cost, plus `epsilon`.
///
/// With negative costs (possible when a new stop order shortens a route) the
/// sum also absorbs each request's most negative cost, so that `M - cost`
/// stays positive and `M` still exceeds any cost gap between the two
/// programs. For non-negative costs this is exactly the plain sum.
pub fn big_m_from_edges<I>(edges: I, epsilon: f64) -> f64
where
    I: IntoIterator<Item = (RequestId, f64)>,
{
    let mut extremes: std::collections::BTreeMap<RequestId, (f64, f64)> = std::collections::BTreeMap::new();
    for (r, cost) in edges {
        let e = extremes.entry(r).or_insert((cost, cost));
        e.0 = e.0.min(cost);
        e.1 = e.1.max(cost);
    }
    extremes.values().map(|(lo, hi)| hi.max(0.0) + (-lo).max(0.0)).sum::<f64>() + epsilon
}

pub fn compute_big_m(graph: &CandidateGraph, epsilon: f64) -> f64 {
    big_m_from_edges(graph.edges().map(|e| (e.request_id, e.blended_cost)), epsilon)
}

/// Whether `values` is an extreme point: the columns in its support, with
/// the slack columns of non-tight rows, are linearly independent.
///
/// Any cycle of edge variables is dependent (weighting request rows by their
/// weight and subtracting vehicle rows annihilates every edge column), so
/// independence holds exactly when the support edges form a forest with at
/// most one positive slack per tree.
pub fn is_vertex(problem: &LpProblem, values: &[f64]) -> bool {
    let nr = problem.requests.len();
    let n = nr + problem.vehicles.len();
    let mut uf = UnionFind::new(n);
    let mut request_sum = vec![0.0; nr];
    let mut load = vec![0.0; problem.vehicles.len()];
    for (c, &x) in problem.columns.iter().zip(values) {
        request_sum[c.request] += x;
        load[c.vehicle] += problem.requests[c.request].weight as f64 * x;
        if x > INTEGRALITY_TOL * 1e-3 && !uf.union(c.request, nr + c.vehicle) {
            return false;
        }
    }
    let mut slacks = vec![0u32; n];
    for (i, row) in problem.requests.iter().enumerate() {
        if row.kind == RowKind::AtMost && 1.0 - request_sum[i] > INTEGRALITY_TOL * 1e-3 {
            slacks[uf.find(i)] += 1;
        }
    }
    for (k, row) in problem.vehicles.iter().enumerate() {
        if row.capacity as f64 - load[k] > INTEGRALITY_TOL * 1e-3 {
            slacks[uf.find(nr + k)] += 1;
        }
    }
    slacks.iter().all(|&s| s <= 1)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Solves the program, returning an optimal extreme point or `Infeasible`.
pub fn solve(problem: &LpProblem) -> Result<LpSolution, LpError> {
    problem.validate()?;
    let mut net = Network::from_problem(problem);
    let pivots = net.optimize()?;
    let infeasible = net.artificial_flow() > 0;
    if infeasible {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            values: vec![0.0; problem.columns.len()],
            objective: 0.0,
            is_vertex: false,
            pivots,
        });
    }
    let values: Vec<f64> = problem
        .columns
        .iter()
        .enumerate()
        .map(|(j, c)| net.flow[j] as f64 / problem.requests[c.request].weight as f64)
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: problem.objective_value(&values),
        is_vertex: is_vertex(problem, &values),
        values,
        pivots,
    })
}

const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArcState {
    Tree,
    Lower,
    Upper,
}

/// Transportation network: request nodes, vehicle nodes and a root sink.
struct Network {
    tail: Vec<usize>,
    head: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<f64>,
    /// Lexicographically dominant cost: 1 on artificial arcs.
    art: Vec<i64>,
    flow: Vec<i64>,
    state: Vec<ArcState>,
    root: usize,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    pot: Vec<f64>,
    pot_art: Vec<i64>,
    tree_adj: Vec<Vec<usize>>,
    eps: f64,
}

impl Network {
    fn from_problem(problem: &LpProblem) -> Self {
        let nr = problem.requests.len();
        let nv = problem.vehicles.len();
        let root = nr + nv;
        let n = root + 1;
        let sign = match problem.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut net = Network {
            tail: Vec::new(),
            head: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            art: Vec::new(),
            flow: Vec::new(),
            state: Vec::new(),
            root,
            parent: vec![root; n],
            parent_arc: vec![usize::MAX; n],
            depth: vec![0; n],
            pot: vec![0.0; n],
            pot_art: vec![0; n],
            tree_adj: vec![Vec::new(); n],
            eps: 0.0,
        };
        let mut scale: f64 = 1.0;
        for c in &problem.columns {
            let per_unit = sign * c.objective / problem.requests[c.request].weight as f64;
            scale = scale.max(per_unit.abs());
            net.push_arc(c.request, nr + c.vehicle, INF, per_unit, 0, 0, ArcState::Lower);
        }
        net.eps = 1e-11 * scale;
        for (k, row) in problem.vehicles.iter().enumerate() {
            let v = nr + k;
            let cap = row.capacity as i64;
            if cap > 0 {
                net.push_arc(v, root, cap, 0.0, 0, 0, ArcState::Tree);
            } else {
                net.push_arc(v, root, 0, 0.0, 0, 0, ArcState::Lower);
                // Keeps the node attached to the tree; can never carry flow.
                net.push_arc(root, v, INF, 0.0, 1, 0, ArcState::Tree);
            }
        }
        for (i, row) in problem.requests.iter().enumerate() {
            let supply = row.weight as i64;
            let art = match row.kind {
                RowKind::AtMost => 0,
                RowKind::Exactly => 1,
            };
            net.push_arc(i, root, INF, 0.0, art, supply, ArcState::Tree);
        }
        net.rebuild_tree();
        net
    }

    #[allow(clippy::too_many_arguments)]
    fn push_arc(&mut self, tail: usize, head: usize, cap: i64, cost: f64, art: i64, flow: i64, state: ArcState) {
        let a = self.tail.len();
        self.tail.push(tail);
        self.head.push(head);
        self.cap.push(cap);
        self.cost.push(cost);
        self.art.push(art);
        self.flow.push(flow);
        self.state.push(state);
        if state == ArcState::Tree {
            self.tree_adj[tail].push(a);
            self.tree_adj[head].push(a);
        }
    }

    fn artificial_flow(&self) -> i64 {
        (0..self.tail.len()).filter(|&a| self.art[a] > 0).map(|a| self.flow[a]).sum()
    }

    /// Recomputes parents, depths and potentials by walking the tree from
    /// the root. Potentials satisfy `cost + pot[tail] - pot[head] = 0` on
    /// every tree arc.
    fn rebuild_tree(&mut self) {
        let n = self.parent.len();
        let mut visited = vec![false; n];
        let mut stack = vec![self.root];
        visited[self.root] = true;
        self.depth[self.root] = 0;
        self.pot[self.root] = 0.0;
        self.pot_art[self.root] = 0;
        while let Some(x) = stack.pop() {
            for &a in &self.tree_adj[x] {
                let (y, forward) = if self.tail[a] == x { (self.head[a], true) } else { (self.tail[a], false) };
                if visited[y] {
                    continue;
                }
                visited[y] = true;
                self.parent[y] = x;
                self.parent_arc[y] = a;
                self.depth[y] = self.depth[x] + 1;
                if forward {
                    self.pot[y] = self.pot[x] + self.cost[a];
                    self.pot_art[y] = self.pot_art[x] + self.art[a];
                } else {
                    self.pot[y] = self.pot[x] - self.cost[a];
                    self.pot_art[y] = self.pot_art[x] - self.art[a];
                }
                stack.push(y);
            }
        }
        debug_assert!(visited.iter().all(|v| *v), "basis is not a spanning tree");
    }

    fn reduced_cost(&self, a: usize) -> (i64, f64) {
        let (u, w) = (self.tail[a], self.head[a]);
        (self.art[a] + self.pot_art[u] - self.pot_art[w], self.cost[a] + self.pot[u] - self.pot[w])
    }

    /// Violation of an eligible arc, or `None` if pivoting on it cannot
    /// improve the lexicographic objective.
    fn violation(&self, a: usize) -> Option<(i64, f64)> {
        let (ra, rc) = self.reduced_cost(a);
        match self.state[a] {
            ArcState::Tree => None,
            ArcState::Lower => {
                if self.cap[a] == 0 {
                    None
                } else if ra < 0 || (ra == 0 && rc < -self.eps) {
                    Some((-ra, -rc))
                } else {
                    None
                }
            }
            ArcState::Upper => {
                if ra > 0 || (ra == 0 && rc > self.eps) {
                    Some((ra, rc))
                } else {
                    None
                }
            }
        }
    }

    fn entering_dantzig(&self) -> Option<usize> {
        let mut best: Option<(usize, (i64, f64))> = None;
        for a in 0..self.tail.len() {
            if let Some(v) = self.violation(a) {
                let better = match best {
                    None => true,
                    Some((_, b)) => v.0 > b.0 || (v.0 == b.0 && v.1 > b.1),
                };
                if better {
                    best = Some((a, v));
                }
            }
        }
        best.map(|(a, _)| a)
    }

    fn entering_bland(&self) -> Option<usize> {
        (0..self.tail.len()).find(|&a| self.violation(a).is_some())
    }

    fn residual(&self, a: usize, forward: bool) -> i64 {
        if forward {
            if self.cap[a] >= INF {
                INF
            } else {
                self.cap[a] - self.flow[a]
            }
        } else {
            self.flow[a]
        }
    }

    fn optimize(&mut self) -> Result<usize, LpError> {
        let size = self.tail.len() + self.parent.len();
        let bland_after = 10 * size + 100;
        let limit = 100 * size + 10_000;
        let mut pivots = 0;
        loop {
            let entering = if pivots < bland_after { self.entering_dantzig() } else { self.entering_bland() };
            let Some(e) = entering else {
                return Ok(pivots);
            };
            if pivots >= limit {
                return Err(LpError::PivotLimit(limit));
            }
            self.pivot(e)?;
            pivots += 1;
        }
    }

    fn pivot(&mut self, e: usize) -> Result<(), LpError> {
        let at_lower = self.state[e] == ArcState::Lower;
        let (first, second) = if at_lower { (self.tail[e], self.head[e]) } else { (self.head[e], self.tail[e]) };

        // Tree paths from both endpoints up to their common ancestor.
        let mut down: Vec<(usize, usize)> = Vec::new(); // (arc, child) from `first` upward
        let mut up: Vec<(usize, usize)> = Vec::new(); // (arc, child) from `second` upward
        let (mut a, mut b) = (first, second);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                down.push((self.parent_arc[a], a));
                a = self.parent[a];
            } else {
                up.push((self.parent_arc[b], b));
                b = self.parent[b];
            }
        }

        // Cycle in flow orientation starting at the apex: down to `first`,
        // across the entering arc, and back up from `second`.
        let mut cycle: Vec<(usize, bool)> = Vec::with_capacity(down.len() + up.len() + 1);
        for &(arc, child) in down.iter().rev() {
            cycle.push((arc, self.head[arc] == child));
        }
        cycle.push((e, at_lower));
        for &(arc, child) in &up {
            cycle.push((arc, self.tail[arc] == child));
        }

        let mut delta = INF;
        let mut leaving = 0;
        for (i, &(arc, forward)) in cycle.iter().enumerate() {
            let r = self.residual(arc, forward);
            if r <= delta {
                delta = r;
                leaving = i;
            }
        }
        if delta >= INF {
            return Err(LpError::Unbounded);
        }
        if delta > 0 {
            for &(arc, forward) in &cycle {
                if forward {
                    self.flow[arc] += delta;
                } else {
                    self.flow[arc] -= delta;
                }
            }
        }

        let l = cycle[leaving].0;
        if l == e {
            self.state[e] = if at_lower { ArcState::Upper } else { ArcState::Lower };
            return Ok(());
        }
        self.state[e] = ArcState::Tree;
        self.state[l] = if self.flow[l] == 0 { ArcState::Lower } else { ArcState::Upper };
        for node in [self.tail[l], self.head[l]] {
            let list = &mut self.tree_adj[node];
            let pos = list.iter().position(|&x| x == l).expect("leaving arc is in the tree");
            list.swap_remove(pos);
        }
        self.tree_adj[self.tail[e]].push(e);
        self.tree_adj[self.head[e]].push(e);
        self.rebuild_tree();
        Ok(())
    }
}

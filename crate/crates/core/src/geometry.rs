//! Constant-speed travel model and the k-d tree used to find the vehicles
//! nearest to a request origin.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{round_seconds, BatchConfig, Location, Metric, Seconds, Vehicle, VehicleId};

pub fn distance(a: &Location, b: &Location, metric: Metric) -> f64 {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    match metric {
        Metric::Euclidean => dx.hypot(dy),
        Metric::Manhattan => dx.abs() + dy.abs(),
    }
}

/// Monotone stand-in for `distance` used for ordering: squared length under
/// the euclidean metric, plain length under manhattan.
pub fn distance_key(a: &Location, b: &Location, metric: Metric) -> f64 {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    match metric {
        Metric::Euclidean => dx * dx + dy * dy,
        Metric::Manhattan => dx.abs() + dy.abs(),
    }
}

pub fn travel_time(a: &Location, b: &Location, config: &BatchConfig) -> Seconds {
    travel_time_with(a, b, config.metric, config.speed)
}

pub fn travel_time_with(a: &Location, b: &Location, metric: Metric, speed: f64) -> Seconds {
    round_seconds(distance(a, b, metric) / speed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    key: f64,
    id: VehicleId,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    id: VehicleId,
    loc: Location,
}

/// Static 2-d tree over vehicle positions. Points are stored in an implicit
/// layout: the median of every slice is its node, the halves its subtrees.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point>,
    metric: Metric,
}

impl SpatialIndex {
    pub fn build<I>(points: I, metric: Metric) -> Self
    where
        I: IntoIterator<Item = (VehicleId, Location)>,
    {
        let mut points: Vec<Point> = points.into_iter().map(|(id, loc)| Point { id, loc }).collect();
        split(&mut points, 0);
        Self { points, metric }
    }

    pub fn from_fleet(fleet: &[Vehicle], metric: Metric) -> Self {
        Self::build(fleet.iter().map(|v| (v.id, v.location)), metric)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Up to `k` vehicles accepted by `keep`, nearest first; equal distances
    /// are ordered by vehicle id.
    pub fn nearest<F>(&self, origin: &Location, k: usize, keep: F) -> Vec<VehicleId>
    where
        F: Fn(VehicleId) -> bool,
    {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut best = BinaryHeap::with_capacity(k + 1);
        self.search(&self.points, 0, origin, k, &keep, &mut best);
        let mut found = best.into_vec();
        found.sort();
        found.into_iter().map(|c| c.id).collect()
    }

    fn search<F>(
        &self,
        slice: &[Point],
        depth: usize,
        origin: &Location,
        k: usize,
        keep: &F,
        best: &mut BinaryHeap<Candidate>,
    ) where
        F: Fn(VehicleId) -> bool,
    {
        if slice.is_empty() {
            return;
        }
        let mid = slice.len() / 2;
        let node = slice[mid];
        if keep(node.id) {
            let candidate = Candidate { key: distance_key(origin, &node.loc, self.metric), id: node.id };
            if best.len() < k {
                best.push(candidate);
            } else if candidate < *best.peek().expect("heap is full") {
                best.pop();
                best.push(candidate);
            }
        }
        let offset = axis_coord(origin, depth) - axis_coord(&node.loc, depth);
        let (near, far) =
            if offset < 0.0 { (&slice[..mid], &slice[mid + 1..]) } else { (&slice[mid + 1..], &slice[..mid]) };
        self.search(near, depth + 1, origin, k, keep, best);
        let plane = match self.metric {
            Metric::Euclidean => offset * offset,
            Metric::Manhattan => offset.abs(),
        };
        // `<=` keeps equidistant points with lower ids reachable.
        if best.len() < k || plane <= best.peek().map_or(f64::INFINITY, |c| c.key) {
            self.search(far, depth + 1, origin, k, keep, best);
        }
    }
}

fn axis_coord(loc: &Location, depth: usize) -> f64 {
    if depth.is_multiple_of(2) {
        loc.x
    } else {
        loc.y
    }
}

fn split(points: &mut [Point], depth: usize) {
    if points.len() <= 1 {
        return;
    }
    let mid = points.len() / 2;
    points.select_nth_unstable_by(mid, |a, b| axis_coord(&a.loc, depth).total_cmp(&axis_coord(&b.loc, depth)));
    let (left, right) = points.split_at_mut(mid);
    split(left, depth + 1);
    split(&mut right[1..], depth + 1);
}

/// The `k` vehicles of `fleet` nearest to `origin` among those accepted by
/// `keep`, nearest first with ties broken by lower id.
pub fn nearest_vehicles<'a, F>(
    origin: &Location,
    k: usize,
    fleet: &'a [Vehicle],
    metric: Metric,
    keep: F,
) -> Vec<&'a Vehicle>
where
    F: Fn(&Vehicle) -> bool,
{
    let index = SpatialIndex::from_fleet(fleet, metric);
    let by_id: std::collections::HashMap<VehicleId, &Vehicle> = fleet.iter().map(|v| (v.id, v)).collect();
    let keep_id = |id: VehicleId| by_id.get(&id).is_some_and(|v| keep(v));
    index.nearest(origin, k, keep_id).into_iter().filter_map(|id| by_id.get(&id).copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(metric: Metric) -> BatchConfig {
        BatchConfig { metric, speed: 10.0, ..BatchConfig::default() }
    }

    fn brute_force(points: &[(VehicleId, Location)], origin: &Location, k: usize, metric: Metric) -> Vec<VehicleId> {
        let mut all: Vec<(f64, VehicleId)> =
            points.iter().map(|(id, loc)| (distance_key(origin, loc, metric), *id)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, id)| id).collect()
    }

    #[test]
    fn travel_time_on_a_345_triangle() {
        let (a, b) = (Location::new(0.0, 0.0), Location::new(30.0, 40.0));
        assert_eq!(travel_time(&a, &b, &config(Metric::Euclidean)), 5);
        assert_eq!(travel_time(&a, &b, &config(Metric::Manhattan)), 7);
        let p = Location::new(5.0, 5.0);
        assert_eq!(travel_time(&p, &p, &config(Metric::Euclidean)), 0);
        assert_eq!(travel_time(&p, &p, &config(Metric::Manhattan)), 0);
    }

    #[test]
    fn nearest_sorts_by_distance() {
        let index = SpatialIndex::build(
            [
                (VehicleId(0), Location::new(100.0, 0.0)),
                (VehicleId(1), Location::new(50.0, 0.0)),
                (VehicleId(2), Location::new(200.0, 0.0)),
            ],
            Metric::Euclidean,
        );
        let origin = Location::default();
        assert_eq!(index.nearest(&origin, 2, |_| true), vec![VehicleId(1), VehicleId(0)]);
        assert_eq!(index.nearest(&origin, 10, |_| true), vec![VehicleId(1), VehicleId(0), VehicleId(2)]);
        assert_eq!(index.nearest(&origin, 10, |id| id != VehicleId(1)), vec![VehicleId(0), VehicleId(2)]);
        assert!(index.nearest(&origin, 3, |_| false).is_empty());
    }

    #[test]
    fn ties_go_to_lower_id() {
        let index = SpatialIndex::build(
            [
                (VehicleId(9), Location::new(10.0, 0.0)),
                (VehicleId(3), Location::new(-10.0, 0.0)),
                (VehicleId(5), Location::new(0.0, 10.0)),
                (VehicleId(1), Location::new(0.0, -10.0)),
            ],
            Metric::Euclidean,
        );
        assert_eq!(index.nearest(&Location::default(), 2, |_| true), vec![VehicleId(1), VehicleId(3)]);
    }

    #[test]
    fn fifty_random_vehicles_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let points: Vec<(VehicleId, Location)> = (0..50)
            .map(|i| (VehicleId(i), Location::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0))))
            .collect();
        let origin = Location::new(500.0, 500.0);
        for metric in [Metric::Euclidean, Metric::Manhattan] {
            let index = SpatialIndex::build(points.clone(), metric);
            assert_eq!(index.nearest(&origin, 10, |_| true), brute_force(&points, &origin, 10, metric));
        }
    }

    #[test]
    fn fleet_helper_applies_predicate() {
        let fleet: Vec<Vehicle> = (0..5)
            .map(|i| {
                let mut v = Vehicle::idle(VehicleId(i), 4, Location::new(i as f64 * 10.0, 0.0), 0);
                v.seats_available = if i % 2 == 0 { 0 } else { 4 };
                v
            })
            .collect();
        let near = nearest_vehicles(&Location::default(), 5, &fleet, Metric::Euclidean, |v| v.seats_available > 0);
        let ids: Vec<VehicleId> = near.iter().map(|v| v.id).collect();
        assert_eq!(ids, vec![VehicleId(1), VehicleId(3)]);
    }

    fn arb_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        // Coarse grid coordinates provoke plenty of exact ties.
        prop::collection::vec((0i32..20, 0i32..20), 0..80)
            .prop_map(|v| v.into_iter().map(|(x, y)| (x as f64 * 25.0, y as f64 * 25.0)).collect())
    }

    proptest! {
        #[test]
        fn kd_tree_matches_sorted_scan(
            raw in arb_points(),
            k in 1usize..15,
            ox in 0.0f64..500.0,
            oy in 0.0f64..500.0,
            manhattan in any::<bool>(),
            modulus in 1u32..4,
        ) {
            let metric = if manhattan { Metric::Manhattan } else { Metric::Euclidean };
            let points: Vec<(VehicleId, Location)> = raw
                .iter()
                .enumerate()
                .map(|(i, (x, y))| (VehicleId(i as u32), Location::new(*x, *y)))
                .collect();
            let origin = Location::new(ox, oy);
            let keep = |id: VehicleId| id.0.is_multiple_of(modulus);
            let index = SpatialIndex::build(points.clone(), metric);
            let filtered: Vec<_> = points.iter().copied().filter(|(id, _)| keep(*id)).collect();
            prop_assert_eq!(index.nearest(&origin, k, keep), brute_force(&filtered, &origin, k, metric));
        }

        #[test]
        fn euclidean_triangle_inequality(
            a in (-1e4f64..1e4, -1e4f64..1e4),
            b in (-1e4f64..1e4, -1e4f64..1e4),
            c in (-1e4f64..1e4, -1e4f64..1e4),
        ) {
            let (a, b, c) = (Location::new(a.0, a.1), Location::new(b.0, b.1), Location::new(c.0, c.1));
            let m = Metric::Euclidean;
            prop_assert!(distance(&a, &c, m) <= distance(&a, &b, m) + distance(&b, &c, m) + 1e-9);
        }

        #[test]
        fn travel_time_is_symmetric(
            a in (-1e4f64..1e4, -1e4f64..1e4),
            b in (-1e4f64..1e4, -1e4f64..1e4),
            manhattan in any::<bool>(),
        ) {
            let metric = if manhattan { Metric::Manhattan } else { Metric::Euclidean };
            let cfg = config(metric);
            let (a, b) = (Location::new(a.0, a.1), Location::new(b.0, b.1));
            prop_assert_eq!(travel_time(&a, &b, &cfg), travel_time(&b, &a, &cfg));
            prop_assert_eq!(travel_time(&a, &a, &cfg), 0);
        }
    }
}

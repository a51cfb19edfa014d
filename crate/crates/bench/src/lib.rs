//! Seeded instances for the benchmarks.

use poolcore::assign::{build_candidate_graph, ia_assign, CandidateGraph};
use poolcore::geometry::SpatialIndex;
use poolcore::model::{BatchConfig, Location, Request, RequestId, Vehicle, VehicleId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn point(rng: &mut impl Rng, size: f64) -> Location {
    Location::new(rng.random_range(0.0..size), rng.random_range(0.0..size))
}

pub fn fleet(rng: &mut impl Rng, count: usize, size: f64) -> Vec<Vehicle> {
    (0..count).map(|k| Vehicle::idle(VehicleId(k as u32), 4, point(rng, size), 0)).collect()
}

pub fn requests(
    rng: &mut impl Rng,
    count: usize,
    first_id: u32,
    size: f64,
    now: i64,
    config: &BatchConfig,
) -> Vec<Request> {
    (0..count)
        .map(|i| {
            let o = point(rng, size);
            let d = point(rng, size);
            let party = if rng.random::<f64>() < 0.85 { 1 } else { rng.random_range(2..=4) };
            Request::new(RequestId(first_id + i as u32), now, o, d, party, config)
        })
        .collect()
}

/// A dispatch batch: `pending` new requests against a fleet of which a
/// share already carries riders from an earlier batch.
pub struct Batch {
    pub pending: Vec<Request>,
    pub fleet: Vec<Vehicle>,
    pub riders: Vec<Request>,
    pub config: BatchConfig,
    pub now: i64,
}

impl Batch {
    pub fn new(seed: u64, pending: usize, vehicles: usize, candidates: usize) -> Self {
        let config = BatchConfig { candidates_per_request: Some(candidates), ..BatchConfig::default() };
        let size = 2000.0 * (vehicles as f64).sqrt().max(1.0) / 5.0;
        let mut rng = rng(seed);
        let mut fleet = fleet(&mut rng, vehicles, size);
        let prior = requests(&mut rng, vehicles / 3, 0, size, 0, &config);
        let index = SpatialIndex::from_fleet(&fleet, config.metric);
        let (graph, _) = build_candidate_graph(&prior, &fleet, &index, &prior, &config, 0).expect("graph builds");
        for v in ia_assign(graph, &config).expect("prior batch assigns").vehicles {
            let k = v.id.0 as usize;
            fleet[k] = v;
        }
        let mut riders = prior;
        let now = 10;
        let pending = requests(&mut rng, pending, riders.len() as u32, size, now, &config);
        riders.extend(pending.iter().cloned());
        Batch { pending, fleet, riders, config, now }
    }

    pub fn graph(&self) -> CandidateGraph {
        let index = SpatialIndex::from_fleet(&self.fleet, self.config.metric);
        build_candidate_graph(&self.pending, &self.fleet, &index, &self.riders, &self.config, self.now)
            .expect("graph builds")
            .0
    }
}

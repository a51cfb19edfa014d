use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::model::{BatchConfig, Location, Request, RequestId, Seconds};

use super::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Area {
    pub fn is_valid(&self) -> bool {
        [self.min_x, self.min_y, self.max_x, self.max_y].iter().all(|v| v.is_finite())
            && self.min_x < self.max_x
            && self.min_y < self.max_y
    }

    pub fn center(&self) -> Location {
        Location::new((self.min_x + self.max_x) / 2.0, (self.min_y + self.max_y) / 2.0)
    }

    fn clamp(&self, p: Location) -> Location {
        Location::new(p.x.clamp(self.min_x, self.max_x), p.y.clamp(self.min_y, self.max_y))
    }

    fn sample(&self, rng: &mut impl Rng) -> Location {
        Location::new(rng.random_range(self.min_x..self.max_x), rng.random_range(self.min_y..self.max_y))
    }
}

/// A Gaussian concentration of trip ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hotspot {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub weight: f64,
}

impl Hotspot {
    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.sigma > 0.0 && self.weight > 0.0
    }
}

/// A generated trip before the travel model turns it into a request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripSample {
    pub submit_time: Seconds,
    pub origin: Location,
    pub destination: Location,
    pub party_size: u32,
}

impl TripSample {
    pub fn into_request(self, id: RequestId, config: &BatchConfig) -> Request {
        Request::new(id, self.submit_time, self.origin, self.destination, self.party_size, config)
    }
}

struct EndSampler<'a> {
    scenario: &'a Scenario,
    pick: Option<WeightedIndex<f64>>,
}

impl EndSampler<'_> {
    fn sample(&self, rng: &mut impl Rng) -> Location {
        let area = &self.scenario.area;
        if let Some(pick) = &self.pick {
            if rng.random::<f64>() < self.scenario.hotspot_share {
                let h = self.scenario.hotspots[pick.sample(rng)];
                let nx = Normal::new(h.x, h.sigma).expect("validated sigma");
                let ny = Normal::new(h.y, h.sigma).expect("validated sigma");
                return area.clamp(Location::new(nx.sample(rng), ny.sample(rng)));
            }
        }
        area.sample(rng)
    }
}

/// Draws the scenario's trips: a Poisson count per hour at that hour's rate,
/// submit times uniform within the hour, trip ends uniform over the area or
/// around a hotspot, and party sizes from `party_weights`.
///
/// Only the seed, horizon, area, rates, hotspots and party weights affect
/// the draw, so sweeps over fleet or batch settings see the same trips.
pub fn sample_trips(scenario: &Scenario) -> Vec<TripSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let parties = WeightedIndex::new(&scenario.party_weights).expect("validated party weights");
    let pick = (scenario.hotspot_share > 0.0 && !scenario.hotspots.is_empty())
        .then(|| WeightedIndex::new(scenario.hotspots.iter().map(|h| h.weight)).expect("validated hotspot weights"));
    let ends = EndSampler { scenario, pick };
    let min_sq = scenario.min_trip_m * scenario.min_trip_m;

    let mut trips = Vec::new();
    let mut hour_start: Seconds = 0;
    let mut hour = 0usize;
    while hour_start < scenario.horizon {
        let hour_end = (hour_start + 3600).min(scenario.horizon);
        let rate = scenario.hourly_rates[hour % scenario.hourly_rates.len()] * (hour_end - hour_start) as f64 / 3600.0;
        let count = if rate > 0.0 { Poisson::new(rate).expect("positive rate").sample(&mut rng) as usize } else { 0 };
        let mut times: Vec<Seconds> = (0..count).map(|_| rng.random_range(hour_start..hour_end)).collect();
        times.sort_unstable();
        for submit_time in times {
            let origin = ends.sample(&mut rng);
            let mut destination = ends.sample(&mut rng);
            // Bounded redraws; the last draw is kept even if short.
            for _ in 0..32 {
                let (dx, dy) = (destination.x - origin.x, destination.y - origin.y);
                if dx * dx + dy * dy >= min_sq {
                    break;
                }
                destination = ends.sample(&mut rng);
            }
            let party_size = parties.sample(&mut rng) as u32 + 1;
            trips.push(TripSample { submit_time, origin, destination, party_size });
        }
        hour_start = hour_end;
        hour += 1;
    }
    trips
}

/// Time-ordered requests with ids `0..n`.
pub fn generate_demand(scenario: &Scenario) -> Vec<Request> {
    sample_trips(scenario)
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.into_request(RequestId(i as u32), &scenario.batch))
        .collect()
}

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use poolcore::geometry::SpatialIndex;
use poolcore::model::Metric;
use poolcore_bench::{fleet, rng};
use rand::Rng;

fn nearest(c: &mut Criterion) {
    let mut group = c.benchmark_group("spatial_index");
    for vehicles in [100, 2500, 10_000] {
        let mut rng = rng(3);
        let fleet = fleet(&mut rng, vehicles, 20_000.0);
        let queries: Vec<_> = (0..64)
            .map(|_| poolcore::model::Location::new(rng.random_range(0.0..20_000.0), rng.random_range(0.0..20_000.0)))
            .collect();
        group.bench_with_input(BenchmarkId::new("build", vehicles), &fleet, |b, f| {
            b.iter(|| SpatialIndex::from_fleet(f, Metric::Euclidean))
        });
        let index = SpatialIndex::from_fleet(&fleet, Metric::Euclidean);
        for k in [10, 250] {
            group.bench_with_input(BenchmarkId::new(format!("nearest_{k}"), vehicles), &queries, |b, qs| {
                b.iter(|| qs.iter().map(|q| index.nearest(q, k, |_| true).len()).sum::<usize>())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, nearest);
criterion_main!(benches);

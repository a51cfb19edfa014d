use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use poolcore::assign::ia_assign;
use poolcore::lpsolve::{build_lp, solve};
use poolcore_bench::Batch;

fn lp_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("lp_solve");
    for (requests, vehicles) in [(30, 100), (150, 500), (150, 2500)] {
        let batch = Batch::new(7, requests, vehicles, 10);
        let problem = build_lp(&batch.graph()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{requests}x{vehicles}")), &problem, |b, p| {
            b.iter(|| solve(p).unwrap())
        });
    }
    group.finish();
}

fn batch_assignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("ia_assign");
    group.sample_size(20);
    for (requests, vehicles, candidates) in [(30, 100, 10), (150, 2500, 25), (150, 2500, 250)] {
        let batch = Batch::new(11, requests, vehicles, candidates);
        let id = BenchmarkId::from_parameter(format!("{requests}x{vehicles}/N{candidates}"));
        group.bench_with_input(id, &batch, |b, batch| {
            b.iter_batched(|| batch.graph(), |g| ia_assign(g, &batch.config).unwrap(), BatchSize::LargeInput)
        });
    }
    group.finish();
}

fn candidate_graph(c: &mut Criterion) {
    let batch = Batch::new(13, 150, 2500, 250);
    c.bench_function("candidate_graph/150x2500/N250", |b| b.iter(|| batch.graph()));
}

criterion_group!(benches, lp_solve, batch_assignment, candidate_graph);
criterion_main!(benches);

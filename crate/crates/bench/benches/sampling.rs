use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mallows_core::arc::{self, ArcChain};
use mallows_core::exposure;
use mallows_core::mallows::{self, MallowsParams};
use mallows_core::seed_stream;
use mallows_core::stitch::{self, TwoSidedSampler};

fn sampler(c: &mut Criterion) {
    let mut group = c.benchmark_group("mallows_sample");
    for n in [100usize, 1000, 10_000] {
        let params = MallowsParams::new(n, 0.99).unwrap();
        let mut rng = seed_stream(1, 0);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &params, |b, p| {
            b.iter(|| mallows::sample(p, &mut rng))
        });
    }
    group.finish();
}

fn statistics(c: &mut Criterion) {
    let params = MallowsParams::new(1000, 0.99).unwrap();
    let p = mallows::sample(&params, &mut seed_stream(2, 0));
    c.bench_function("cycle_decomposition_1000", |b| b.iter(|| p.cycle_decomposition()));
    c.bench_function("arc_chain_of_1000", |b| b.iter(|| arc::arc_chain_of(&p)));
    c.bench_function("diagonal_exposure_1000", |b| b.iter(|| exposure::exposure_events(&p)));
}

fn chains(c: &mut Criterion) {
    let chain = ArcChain::finite(1000, 0.99).unwrap();
    let mut rng = seed_stream(3, 0);
    c.bench_function("arc_chain_run_1000", |b| b.iter(|| chain.run(0, 1000, &mut rng).unwrap()));

    let params = MallowsParams::new(1000, 0.99).unwrap();
    c.bench_function("stitch_sample_1000_split_500", |b| {
        b.iter(|| stitch::stitch_sample(&params, 500, &mut rng).unwrap())
    });

    let window = TwoSidedSampler::new(0.99, 100, stitch::DEFAULT_HORIZON).unwrap();
    c.bench_function("two_sided_window_100", |b| b.iter(|| window.sample(&mut rng)));
}

criterion_group!(benches, sampler, statistics, chains);
criterion_main!(benches);

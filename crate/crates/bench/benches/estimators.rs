use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use clipbandit::distributions::RngStream;
use clipbandit::estimators::{median, median_of_means, smom, SmomConfig};
use clipbandit_bench::heavy_samples;

fn estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimators");
    for (m, n) in [(1, 1), (1, 3), (3, 4)] {
        let cfg = SmomConfig::new(m, n, 0.0).unwrap();
        let xs = heavy_samples(cfg.batch_size());
        let mut rng = RngStream::new(0, 0);
        group.bench_with_input(BenchmarkId::new("smom", format!("m{m}n{n}")), &xs, |b, xs| {
            b.iter(|| smom(black_box(xs), &cfg, &mut rng).unwrap())
        });
    }
    for len in [9usize, 101, 1001] {
        let xs = heavy_samples(len);
        group.bench_with_input(BenchmarkId::new("median", len), &xs, |b, xs| {
            b.iter(|| median(black_box(xs)))
        });
        group.bench_with_input(BenchmarkId::new("median_of_means", len), &xs, |b, xs| {
            b.iter(|| median_of_means(black_box(xs), 9).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, estimators);
criterion_main!(benches);

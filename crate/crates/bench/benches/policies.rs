use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use clipbandit::environments::builtin_env;
use clipbandit::harness::{run_trial, TrialOptions};
use clipbandit_bench::table_policies;

const BUDGET: u64 = 2_000;

fn trial_cost(c: &mut Criterion) {
    let env = builtin_env("Env1").unwrap();
    let opts = TrialOptions::default();
    let mut group = c.benchmark_group("trial_env1");
    group.throughput(Throughput::Elements(BUDGET));
    group.sample_size(20);
    for cfg in table_policies() {
        group.bench_with_input(BenchmarkId::from_parameter(&cfg.name), &cfg, |b, cfg| {
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                run_trial(&env, cfg, BUDGET, seed, &opts).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, trial_cost);
criterion_main!(benches);

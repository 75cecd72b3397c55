//! Rayon pool versus a single worker on the two hot loops: a stage build and
//! the pair-sampled modulus check.
//!
//! With default features both variants go through rayon; the `one-thread`
//! variant pins the pool to a single worker. `cargo bench
//! --no-default-features` measures the plain-iterator fallback instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lusin_core::check::{modulus_check, PairPlan};
use lusin_core::lusin::{multi_stage_build, BuildConfig};
use lusin_core::{par, BoxDomain, FieldCollection, Modulus};
use std::hint::black_box;

fn config() -> BuildConfig {
    BuildConfig {
        modulus: Modulus::Power { beta: 1.0 },
        resolution: 16,
        theta: 0.05,
        max_stages: 1,
        certify_pairs: 0,
        max_cells: 1 << 16,
        ..BuildConfig::default()
    }
}

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    let mut v = vec![(
        "one-thread".to_string(),
        rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
    )];
    if all > 1 {
        v.push((
            format!("{all}-threads"),
            rayon::ThreadPoolBuilder::new().num_threads(all).build().unwrap(),
        ));
    }
    v
}

fn bench(c: &mut Criterion) {
    let field = FieldCollection::heisenberg();
    let dom = BoxDomain::unit(2);
    let cfg = config();
    let (g, _) = multi_stage_build(&field, &dom, &cfg).unwrap();
    let plan = PairPlan::for_domain(&dom, 20_000);
    let mode = if par::is_parallel() { "rayon" } else { "sequential-fallback" };

    let mut group = c.benchmark_group(format!("build/{mode}"));
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| black_box(multi_stage_build(&field, &dom, &cfg).unwrap())))
        });
    }
    group.finish();

    let mut group = c.benchmark_group(format!("modulus-check/{mode}"));
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| black_box(modulus_check(&g, &cfg.modulus, &dom, &plan, 0))))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);

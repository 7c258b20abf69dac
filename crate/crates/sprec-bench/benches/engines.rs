use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sprec_bench::{blyth_triple, exponential_chain};
use sprec_core::{
    check_ssp, perm_probability, perm_table, sp_probability, EngineConfig, Method, Permutation,
    Rng,
};

fn bench_pairwise(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let d1 = sprec_core::Distribution::weibull(2.0, 1.0).unwrap();
    let d2 = sprec_core::Distribution::weibull(2.0, 1.5).unwrap();

    c.bench_function("sp_probability/quadrature/weibull-pair", |b| {
        b.iter(|| sp_probability(&d1, &d2, Some(Method::Quadrature), &cfg).unwrap())
    });

    let mc = EngineConfig { mc_samples: 100_000, ..EngineConfig::default() };
    c.bench_function("sp_probability/monte-carlo/100k", |b| {
        b.iter(|| sp_probability(&d1, &d2, Some(Method::MonteCarlo), &mc).unwrap())
    });
}

fn bench_perm_tables(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let mut group = c.benchmark_group("perm_table/quadrature");
    for n in [3usize, 4, 5] {
        let rates: Vec<f64> = (1..=n).rev().map(|r| r as f64).collect();
        let dists = exponential_chain(&rates);
        group.bench_with_input(BenchmarkId::from_parameter(n), &dists, |b, dists| {
            b.iter(|| perm_table(dists, Some(Method::Quadrature), &cfg).unwrap())
        });
    }
    group.finish();

    let blyth = blyth_triple();
    c.bench_function("perm_table/exact/blyth", |b| {
        b.iter(|| perm_table(&blyth, Some(Method::Exact), &cfg).unwrap())
    });

    let mc = EngineConfig { mc_samples: 100_000, ..EngineConfig::default() };
    let dists = exponential_chain(&[3.0, 2.0, 1.0]);
    c.bench_function("perm_table/monte-carlo/100k-joint", |b| {
        b.iter(|| perm_table(&dists, Some(Method::MonteCarlo), &mc).unwrap())
    });
}

fn bench_ssp(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let dists = exponential_chain(&[4.0, 3.0, 2.0, 1.0]);
    c.bench_function("check_ssp/quadrature/n4", |b| {
        b.iter(|| check_ssp(&dists, Some(Method::Quadrature), &cfg).unwrap())
    });

    let sigma = Permutation::from_one_based(&[4, 2, 3, 1]).unwrap();
    c.bench_function("perm_probability/quadrature/n4", |b| {
        b.iter(|| perm_probability(&dists, &sigma, Some(Method::Quadrature), &cfg).unwrap())
    });
}

fn bench_sampling(c: &mut Criterion) {
    let d = sprec_core::Distribution::weibull(2.0, 1.0).unwrap();
    c.bench_function("sample/weibull/10k", |b| {
        b.iter(|| {
            let mut rng = Rng::new(0, 0);
            d.sample(&mut rng, 10_000)
        })
    });
}

criterion_group!(benches, bench_pairwise, bench_perm_tables, bench_ssp, bench_sampling);
criterion_main!(benches);

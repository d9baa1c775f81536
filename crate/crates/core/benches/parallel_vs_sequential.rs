use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lp_sobolev::harness::checks::{check_general_affine_sobolev, check_petty};
use lp_sobolev::harness::generate::{random_polytope, random_pwa, rng};
use lp_sobolev::{par, SphericalQuadrature, Vec3};

fn petty(c: &mut Criterion) {
    let q = SphericalQuadrature::build(2, 4).unwrap();
    let mut r = rng(1);
    let bodies: Vec<_> = (0..32).map(|_| random_polytope(&mut r, 2).unwrap()).collect();
    let mut group = c.benchmark_group("petty_corpus");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", bodies.len()), |b| {
        b.iter(|| bodies.iter().map(|k| check_petty(k, 2.5, 0.5, &q).ratio).collect::<Vec<_>>())
    });
    group.bench_function(BenchmarkId::new("par_map", bodies.len()), |b| {
        b.iter(|| par::map(&bodies, |k| check_petty(k, 2.5, 0.5, &q).ratio))
    });
    group.finish();
}

fn affine_sobolev(c: &mut Criterion) {
    let q = SphericalQuadrature::build(3, 3).unwrap();
    let mut r = rng(2);
    let fs: Vec<_> = (0..8).map(|_| random_pwa(&mut r, 3, 2, Vec3::zeros(), 1.0).unwrap()).collect();
    let mut group = c.benchmark_group("affine_sobolev_3d");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| fs.iter().map(|f| check_general_affine_sobolev(f, 1.8, 0.3, &q).ratio).collect::<Vec<_>>())
    });
    group.bench_function("par_map", |b| {
        b.iter(|| par::map(&fs, |f| black_box(check_general_affine_sobolev(f, 1.8, 0.3, &q).ratio)))
    });
    group.finish();
}

criterion_group!(benches, petty, affine_sobolev);
criterion_main!(benches);

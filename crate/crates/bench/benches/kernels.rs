use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mmlab_core::concentration::{alpha_lower_bound, cube_alpha_exact, SearchConfig};
use mmlab_core::dynamics::ramsey_verify;
use mmlab_core::generators::{hamming_cube, sphere_sampled, symmetric_group, SamplerConfig};
use mmlab_core::observable::obs_distance;
use mmlab_core::transport::{emd, MeasurePair};
use mmlab_core::{alpha_exact, FiniteMMSpace, SphereGeometry};

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("alpha_exact");
    for n in [3, 4] {
        let cube = hamming_cube(n).unwrap();
        g.bench_with_input(BenchmarkId::new("cube_enumeration", n), &cube, |b, s| {
            b.iter(|| alpha_exact(s, black_box(0.3)).unwrap())
        });
    }
    let s4 = symmetric_group(4).unwrap();
    g.bench_function("s4_enumeration", |b| b.iter(|| alpha_exact(&s4, black_box(0.3)).unwrap()));
    for n in [8, 12] {
        g.bench_with_input(BenchmarkId::new("cube_extremal", n), &n, |b, &n| {
            b.iter(|| cube_alpha_exact(n, black_box(0.25)).unwrap())
        });
    }
    g.finish();
}

fn lower_bound(c: &mut Criterion) {
    let mut g = c.benchmark_group("alpha_lower_bound");
    g.sample_size(10);
    for samples in [1_000, 10_000] {
        let sphere = sphere_sampled(2, &SamplerConfig::new(1, samples).unwrap(), SphereGeometry::Geodesic).unwrap();
        g.bench_with_input(BenchmarkId::new("sphere2", samples), &sphere, |b, s| {
            b.iter(|| alpha_lower_bound(s, black_box(0.3), &SearchConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn transport(c: &mut Criterion) {
    let mut g = c.benchmark_group("emd");
    for n in [5, 7] {
        let cube = hamming_cube(n).unwrap();
        let m = cube.len();
        let mu1: Vec<f64> = (0..m).map(|i| (i % 3 + 1) as f64).collect();
        let mu2: Vec<f64> = (0..m).map(|i| ((i * 7) % 5 + 1) as f64).collect();
        let (s1, s2): (f64, f64) = (mu1.iter().sum(), mu2.iter().sum());
        let pair = MeasurePair::new(
            &cube,
            mu1.iter().map(|x| x / s1).collect(),
            mu2.iter().map(|x| x / s2).collect(),
        )
        .unwrap();
        g.bench_with_input(BenchmarkId::new("cube", n), &(cube, pair), |b, (s, p)| b.iter(|| emd(s, p).unwrap()));
    }
    g.finish();
}

fn observable(c: &mut Criterion) {
    let mut g = c.benchmark_group("obs_distance");
    g.sample_size(10);
    let point = FiniteMMSpace::point();
    let cube6 = hamming_cube(6).unwrap();
    g.bench_function("cube6_to_point", |b| b.iter(|| obs_distance(&cube6, &point, &SearchConfig::default()).unwrap()));
    let cube2 = hamming_cube(2).unwrap();
    let cube3 = hamming_cube(3).unwrap();
    let cfg = SearchConfig {
        budget: 32,
        ..SearchConfig::default()
    };
    g.bench_function("cube2_to_cube3", |b| b.iter(|| obs_distance(&cube2, &cube3, &cfg).unwrap()));
    g.finish();
}

fn ramsey(c: &mut Criterion) {
    let mut g = c.benchmark_group("ramsey");
    g.sample_size(10);
    g.bench_function("r33_on_5", |b| b.iter(|| ramsey_verify(2, 3, 2, 5).unwrap()));
    g.bench_function("r33_on_6", |b| b.iter(|| ramsey_verify(2, 3, 2, 6).unwrap()));
    g.finish();
}

criterion_group!(benches, exact, lower_bound, transport, observable, ramsey);
criterion_main!(benches);

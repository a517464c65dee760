use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use srpair_bench::{henon, henon_pair, sample_points};
use srpair_core::certificates::{find_certificate, SearchOptions};
use srpair_core::green::{green_pair, GreenOptions, Precision};
use srpair_core::heights::canonical_height_pair;
use srpair_core::periodic::{periodic_points_numeric, HenonMap, NumericOptions};
use srpair_core::Place;

fn certificate(c: &mut Criterion) {
    let (f, g) = henon();
    let (hf, hg) = (f.homogenize(), g.homogenize());
    c.bench_function("certificate/henon", |b| {
        b.iter(|| find_certificate(black_box(&hf), black_box(&hg), &SearchOptions::default()).unwrap())
    });
}

fn green(c: &mut Criterion) {
    let pair = henon_pair();
    let points = sample_points(16);
    let mut group = c.benchmark_group("green");
    for prec in [Precision::Hardware, Precision::High] {
        let opts = GreenOptions { precision: prec, ..Default::default() };
        group.bench_with_input(BenchmarkId::new("arch", prec), &opts, |b, opts| {
            b.iter(|| {
                for x in &points {
                    black_box(green_pair(&pair, x, Place::Archimedean, opts).unwrap());
                }
            })
        });
    }
    group.bench_function("height", |b| {
        b.iter(|| {
            for x in &points {
                black_box(canonical_height_pair(&pair, x, &GreenOptions::default()).unwrap());
            }
        })
    });
    group.finish();
}

fn periodic(c: &mut Criterion) {
    let f = HenonMap::horseshoe();
    let mut group = c.benchmark_group("periodic");
    group.sample_size(10);
    for n in [3u32, 5] {
        group.bench_with_input(BenchmarkId::new("numeric", n), &n, |b, &n| {
            b.iter(|| periodic_points_numeric(&f, n, &NumericOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, certificate, green, periodic);
criterion_main!(benches);

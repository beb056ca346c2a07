use std::hint::black_box;

use buffon::{
    exact_mass, sample, sample_rational, Engine, Gamma, Limits, PiQuarter, SeededSource,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn memoized(c: &mut Criterion) {
    let gamma = Engine::new(Gamma::new());
    let pi4 = Engine::new(PiQuarter);
    let mut i = 0u64;
    c.bench_function("engine gamma", |b| {
        b.iter(|| {
            i += 1;
            black_box(gamma.sample(&mut SeededSource::new(1, i)).unwrap())
        })
    });
    c.bench_function("engine pi4", |b| {
        b.iter(|| {
            i += 1;
            black_box(pi4.sample(&mut SeededSource::new(1, i)).unwrap())
        })
    });
}

fn unmemoized(c: &mut Criterion) {
    let gamma = Gamma::new();
    let limits = Limits::default();
    let mut i = 0u64;
    c.bench_function("sample gamma", |b| {
        b.iter(|| {
            i += 1;
            black_box(sample(&gamma, &mut SeededSource::new(2, i), &limits).unwrap())
        })
    });
    c.bench_function("sample_rational 1/3", |b| {
        b.iter(|| {
            i += 1;
            black_box(sample_rational(1, 3, &mut SeededSource::new(2, i)).unwrap())
        })
    });
}

fn oracle(c: &mut Criterion) {
    let limits = Limits::default();
    c.bench_function("exact_mass pi4 depth 40", |b| {
        b.iter(|| black_box(exact_mass(&PiQuarter, 40, &limits).unwrap()))
    });
    c.bench_function("exact_mass gamma depth 12", |b| {
        b.iter(|| black_box(exact_mass(&Gamma::new(), 12, &limits).unwrap()))
    });
}

criterion_group!(benches, memoized, unmemoized, oracle);
criterion_main!(benches);

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hdx_core::decompose::{bottom_up_recursive, hd_level_set, HdBasis};
use hdx_core::generators::{complete_complex, random_function};
use hdx_core::spectral::measure_gamma;
use hdx_core::walks::assemble_walk;
use hdx_core::{FaceFunction, SimplicialComplex, WalkSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 3] = [10, 14, 18];

fn fixture(n: usize) -> (Arc<SimplicialComplex>, FaceFunction) {
    let x = complete_complex(n, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = random_function(&x, 3, &mut rng).unwrap();
    (x, f)
}

fn bench_construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("complete_complex");
    for n in SIZES {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| complete_complex(black_box(n), 3).unwrap());
        });
    }
    g.finish();
}

fn bench_assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_canonical_2_1");
    for n in SIZES {
        let (x, _) = fixture(n);
        let spec = WalkSpec::canonical(2, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| assemble_walk(black_box(x), &spec).unwrap());
        });
    }
    g.finish();

    let mut g = c.benchmark_group("assemble_noise_walk");
    for n in SIZES {
        let (x, _) = fixture(n);
        let spec = WalkSpec::noise(3, 0.5).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| assemble_walk(black_box(x), &spec).unwrap());
        });
    }
    g.finish();
}

fn bench_apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply_noise_walk");
    for n in SIZES {
        let (x, f) = fixture(n);
        let op = assemble_walk(&x, &WalkSpec::noise(3, 0.5).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &(op, f), |b, (op, f)| {
            b.iter(|| op.apply(black_box(f)).unwrap());
        });
    }
    g.finish();
}

fn bench_decomposition(c: &mut Criterion) {
    let mut g = c.benchmark_group("bottom_up_recursive");
    for n in SIZES {
        let (_, f) = fixture(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| bottom_up_recursive(black_box(f)).unwrap());
        });
    }
    g.finish();

    // basis construction dominates, so time it separately from the solve
    let mut g = c.benchmark_group("hd_basis_build");
    for n in SIZES {
        let (x, _) = fixture(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| HdBasis::new(black_box(x), 3).unwrap());
        });
    }
    g.finish();

    let mut g = c.benchmark_group("hd_level_set_solve");
    for n in SIZES {
        let (_, f) = fixture(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| hd_level_set(black_box(f)).unwrap());
        });
    }
    g.finish();
}

fn bench_gamma(c: &mut Criterion) {
    let mut g = c.benchmark_group("measure_gamma");
    for n in SIZES {
        let (x, _) = fixture(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| measure_gamma(black_box(x)).unwrap());
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    bench_construction,
    bench_assembly,
    bench_apply,
    bench_decomposition,
    bench_gamma
);
criterion_main!(benches);

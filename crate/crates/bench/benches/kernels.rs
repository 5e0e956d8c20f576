//! Benchmarks for the hot kernels: operator application on each evaluation
//! path (dense, FFT, and matrix-free direct), greedy recovery, the ADMM
//! basis-pursuit solver, and coherence evaluation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use sparsetrig::analysis::coherence;
use sparsetrig::bpdn::{bpdn_solve, BpdnConfig};
use sparsetrig::omp::{omp_recover, OmpConfig};
use sparsetrig::{
    noise_on_sphere, FrequencySet, FrequencySpec, MeasurementOperator, SamplingModel, SamplingSet,
    SparseCoefficients,
};

/// Builds a 1-d operator over a symmetric band of `width` frequencies and
/// `n` sample points; `threshold` picks the materialization cutoff.
fn operator(
    width: u32,
    model: SamplingModel,
    n: usize,
    seed: u64,
    threshold: usize,
) -> MeasurementOperator {
    let fs = FrequencySet::new(1, &FrequencySpec::Symmetric { width }).unwrap();
    let x = SamplingSet::draw(&fs, model, n, seed).unwrap();
    MeasurementOperator::with_threshold(fs, x, threshold).unwrap()
}

/// A random `m`-sparse coefficient vector and the matching noisy samples.
fn instance(
    op: &MeasurementOperator,
    m: usize,
    sigma: f64,
    seed: u64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let fs = op.frequency_set();
    let c = SparseCoefficients::draw(fs, m, seed).unwrap();
    let mut y = op.forward(c.values()).unwrap();
    for (yi, ei) in y
        .iter_mut()
        .zip(noise_on_sphere(op.n_samples(), sigma, seed).unwrap())
    {
        *yi += ei;
    }
    (c.values().to_vec(), y)
}

/// One operator per evaluation path: dense cache, grid FFT, and the
/// matrix-free direct loop (threshold 0 forces the latter).
fn path_operators(width: u32, n: usize) -> Vec<(&'static str, MeasurementOperator)> {
    vec![
        (
            "dense",
            operator(width, SamplingModel::ContinuousUniform, n, 1, usize::MAX),
        ),
        (
            "fft",
            operator(width, SamplingModel::GridSubset { q: width }, n, 1, 0),
        ),
        (
            "direct",
            operator(width, SamplingModel::ContinuousUniform, n, 1, 0),
        ),
    ]
}

fn bench_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for width in [256u32, 1024] {
        for (path, op) in path_operators(width, 100) {
            let coeffs = SparseCoefficients::draw(op.frequency_set(), 10, 2).unwrap();
            let dense = coeffs.values().to_vec();
            group.bench_with_input(BenchmarkId::new(path, width), &op, |b, op| {
                b.iter(|| op.forward(black_box(&dense)).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_adjoint(c: &mut Criterion) {
    let mut group = c.benchmark_group("adjoint");
    for width in [256u32, 1024] {
        for (path, op) in path_operators(width, 100) {
            let (_, y) = instance(&op, 10, 0.1, 2);
            group.bench_with_input(BenchmarkId::new(path, width), &op, |b, op| {
                b.iter(|| op.adjoint(black_box(&y)).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_omp(c: &mut Criterion) {
    let mut group = c.benchmark_group("omp_recover");
    group.sample_size(20);
    for m in [5usize, 10, 20] {
        let op = operator(256, SamplingModel::ContinuousUniform, 100, 3, usize::MAX);
        let (_, y) = instance(&op, m, 0.1, 3);
        let cfg = OmpConfig::with_sparsity(m);
        group.bench_with_input(BenchmarkId::from_parameter(m), &op, |b, op| {
            b.iter(|| omp_recover(op, black_box(&y), &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_bpdn(c: &mut Criterion) {
    let mut group = c.benchmark_group("bpdn_solve");
    group.sample_size(10);
    let op = operator(64, SamplingModel::ContinuousUniform, 32, 4, usize::MAX);
    let (_, y) = instance(&op, 4, 0.1, 4);
    let cfg = BpdnConfig::with_sigma(0.1);
    group.bench_with_input(BenchmarkId::from_parameter("w64_n32_m4"), &op, |b, op| {
        b.iter(|| bpdn_solve(op, black_box(&y), &cfg).unwrap())
    });
    group.finish();
}

fn bench_coherence(c: &mut Criterion) {
    let mut group = c.benchmark_group("coherence");
    for width in [256u32, 1024] {
        let op = operator(width, SamplingModel::ContinuousUniform, 100, 5, usize::MAX);
        group.bench_with_input(BenchmarkId::from_parameter(width), &op, |b, op| {
            b.iter(|| coherence(black_box(op)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_forward,
    bench_adjoint,
    bench_omp,
    bench_bpdn,
    bench_coherence
);
criterion_main!(benches);

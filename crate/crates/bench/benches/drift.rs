use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use driftlab::identifiability::{drift_gap_scan, random_measure, ScanGrid};
use driftlab::rng::stream;
use driftlab::{drift_batch, DriftConfig, Kernel, SampleRole, SampleSet};
use rand::Rng;

fn batch(n: usize, role: SampleRole, seed: u64) -> SampleSet {
    let mut r = stream(seed, 0);
    let flat = (0..2 * n).map(|_| r.random_range(-3.0..3.0)).collect();
    SampleSet::from_flat(2, flat, role).unwrap()
}

fn drift_batches(c: &mut Criterion) {
    let mut g = c.benchmark_group("drift_batch");
    for n in [64, 128, 256] {
        let p = batch(n, SampleRole::TargetP, 1);
        let q = batch(n, SampleRole::GeneratedQ, 2);
        for kernel in [
            Kernel::laplace(1.0).unwrap(),
            Kernel::gaussian(1.0).unwrap(),
        ] {
            let cfg = DriftConfig::new(kernel);
            g.bench_with_input(BenchmarkId::new(kernel.family().name(), n), &n, |b, _| {
                b.iter(|| drift_batch(&cfg, &p, &q, black_box(&q), 0.0).unwrap())
            });
        }
    }
    g.finish();
}

fn gap_scan(c: &mut Criterion) {
    let mut r = stream(3, 0);
    let p = random_measure(&mut r, 5, 2, 2.0).unwrap();
    let q = random_measure(&mut r, 5, 2, 2.0).unwrap();
    let grid = ScanGrid::cube(2, 5.0, 61).unwrap();
    let k = Kernel::gaussian(1.0).unwrap();
    c.bench_function("drift_gap_scan_61x61", |b| {
        b.iter(|| drift_gap_scan(&k, black_box(&p), &q, &grid).unwrap())
    });
}

criterion_group!(benches, drift_batches, gap_scan);
criterion_main!(benches);

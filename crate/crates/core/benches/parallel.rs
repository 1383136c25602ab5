//! Thread-pool scaling of the data-parallel kernels. `sequential` pins rayon
//! to one worker; building with `--no-default-features` gives the plain
//! sequential code path for both variants.

use bsenclose::birman_schwinger::{bs_scan, ScanOptions, ScanRect};
use bsenclose::grid::{assemble_perturbed, apply_free_resolvent, FieldOnGrid, GridSpec, OperatorKind};
use bsenclose::par;
use bsenclose::potential::{PotentialSpec, Shape};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;
use std::hint::black_box;

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn variants() -> [(&'static str, usize); 2] {
    [("sequential", 1), ("parallel", threads())]
}

fn scan(c: &mut Criterion) {
    let g = GridSpec::new(3, 4.0, 8, 4).unwrap();
    let v = PotentialSpec::preset(Shape::MatrixMix, 3, 4, C64::new(0.5, 0.0), 1.0, 2.0).unwrap();
    let rect = ScanRect { re_min: -3.0, re_max: 3.0, im_min: 0.2, im_max: 2.0, n_re: 4, n_im: 4 };
    let opts = ScanOptions::default();
    let mut group = c.benchmark_group("bs_scan");
    group.sample_size(10);
    for (name, k) in variants() {
        group.bench_function(BenchmarkId::new(name, k), |b| {
            b.iter(|| par::with_threads(k, || bs_scan(OperatorKind::Dirac, 1.0, &v, &g, &rect, &opts).unwrap()))
        });
    }
    group.finish();
}

fn resolvent(c: &mut Criterion) {
    let g = GridSpec::new(3, 8.0, 32, 4).unwrap();
    let f = FieldOnGrid::from_fn(&g, |x, s| C64::new((-x.iter().map(|t| t * t).sum::<f64>()).exp(), s as f64));
    let mut group = c.benchmark_group("free_resolvent");
    for (name, k) in variants() {
        group.bench_function(BenchmarkId::new(name, k), |b| {
            b.iter(|| {
                par::with_threads(k, || {
                    apply_free_resolvent(OperatorKind::Dirac, 1.0, C64::new(0.3, 0.7), black_box(&f)).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let g = GridSpec::new(3, 4.0, 8, 1).unwrap();
    let v = PotentialSpec::preset(Shape::Bump, 3, 1, C64::new(2.0, 0.5), 2.0, 2.0).unwrap();
    let mut group = c.benchmark_group("assemble");
    group.sample_size(10);
    for (name, k) in variants() {
        group.bench_function(BenchmarkId::new(name, k), |b| {
            b.iter(|| par::with_threads(k, || assemble_perturbed(OperatorKind::KleinGordon, 1.0, Some(&v), &g, 4096).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, scan, resolvent, assembly);
criterion_main!(benches);

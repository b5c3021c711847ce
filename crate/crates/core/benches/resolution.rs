use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use twext::algebra::{a2, atmf};
use twext::par;
use twext::presets;
use twext::resolution::chart::chart_with_products;
use twext::resolution::{ground_resolution, minimal_resolution};

fn resolutions(c: &mut Criterion) {
    let mut g = c.benchmark_group("resolve");
    g.sample_size(10);
    for (label, sequential) in [("parallel", false), ("sequential", true)] {
        g.bench_function(BenchmarkId::new("A(2) ground s8 t30", label), |b| {
            par::set_sequential(sequential);
            b.iter(|| ground_resolution(a2(), 8, 30));
        });
        g.bench_function(BenchmarkId::new("A^tmf ground s8 t40", label), |b| {
            par::set_sequential(sequential);
            b.iter(|| ground_resolution(atmf(), 8, 40));
        });
        g.bench_function(BenchmarkId::new("N2 s6 t25 with h0", label), |b| {
            par::set_sequential(sequential);
            let m = Arc::new(presets::module("atmf-n2").unwrap());
            b.iter(|| {
                let r = minimal_resolution(m.clone(), 6, 25).unwrap();
                chart_with_products(&r, &["h0"]).unwrap()
            });
        });
    }
    par::set_sequential(false);
    g.finish();
}

criterion_group!(benches, resolutions);
criterion_main!(benches);

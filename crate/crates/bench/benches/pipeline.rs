// SPDX-License-Identifier: Apache-2.0

//! Front-end, synthesis and co-simulation throughput on corpus kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hls_core::charlib::ComponentLibrary;
use hls_core::corpus::{builtin, CorpusEntry};
use hls_core::frontend::check;
use hls_core::pipeline::{synthesize, HlsOptions};
use hls_core::rtlsim::{cosim_equiv, CosimConfig};

const KERNELS: [&str; 4] = ["fir", "matmul", "bubble_sort", "crc32"];

fn entries() -> Vec<CorpusEntry> {
    builtin().into_iter().filter(|e| KERNELS.contains(&e.name.as_str())).collect()
}

fn options(e: &CorpusEntry) -> HlsOptions {
    HlsOptions {
        top: e.top.clone(),
        clock_ps: 4000,
        iface: Some(e.iface.clone()),
        ..Default::default()
    }
}

fn frontend(c: &mut Criterion) {
    let mut g = c.benchmark_group("frontend");
    for e in entries() {
        let unit = e.unit();
        g.bench_with_input(BenchmarkId::from_parameter(&e.name), &unit, |b, u| {
            b.iter(|| check(u, &e.top).unwrap())
        });
    }
    g.finish();
}

fn synthesis(c: &mut Criterion) {
    let lib = ComponentLibrary::default_library();
    let mut g = c.benchmark_group("synthesize");
    for e in entries() {
        let (unit, opts) = (e.unit(), options(&e));
        g.bench_function(BenchmarkId::from_parameter(&e.name), |b| {
            b.iter(|| synthesize(&unit, &lib, &opts).unwrap())
        });
    }
    g.finish();
}

fn cosim(c: &mut Criterion) {
    let lib = ComponentLibrary::default_library();
    let mut g = c.benchmark_group("cosim");
    for e in entries() {
        let d = synthesize(&e.unit(), &lib, &options(&e)).unwrap();
        let v = e.generate_vectors(1, 1).unwrap().remove(0);
        let cfg = CosimConfig::default();
        g.bench_function(BenchmarkId::from_parameter(&e.name), |b| {
            b.iter(|| assert!(cosim_equiv(&d.prog, &d.fsmd, &v, &cfg).unwrap().pass))
        });
    }
    g.finish();
}

fn library(c: &mut Criterion) {
    c.bench_function("default_library", |b| b.iter(ComponentLibrary::default_library));
}

criterion_group!(benches, frontend, synthesis, cosim, library);
criterion_main!(benches);

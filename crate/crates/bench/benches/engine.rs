use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use deconv_bench::{noiseless_instance, sparse_noise_instance, table_spec};
use deconv_core::experiments::{solve_noiseless, solve_sparse};
use deconv_core::{
    build_certificate, certify_with_table, piecewise_tables, select_certificate_samples, verify_certificate,
    worst_case_pattern, KernelFamily, KernelSpec, SolveOptions,
};

fn tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("tables");
    g.sample_size(10);
    for fam in [KernelFamily::Gaussian, KernelFamily::Ricker] {
        let spec = table_spec(fam, 8.0);
        g.bench_function(format!("{}_coarse8", fam.name()), |b| b.iter(|| piecewise_tables(black_box(&spec)).unwrap()));
    }
    let table = piecewise_tables(&table_spec(KernelFamily::Gaussian, 8.0)).unwrap();
    g.bench_function("certify_from_table", |b| b.iter(|| certify_with_table(black_box(&table), 3.5)));
    g.finish();
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    let opts = SolveOptions::default();
    let inst = noiseless_instance();
    g.bench_function("basis_pursuit_10_spikes", |b| b.iter(|| solve_noiseless(black_box(&inst), &opts).unwrap()));
    let sp = sparse_noise_instance();
    g.bench_function("sparse_bp_10_spikes", |b| b.iter(|| solve_sparse(black_box(&sp), 2.0, &opts).unwrap()));
    g.finish();
}

fn certificate(c: &mut Criterion) {
    let k = KernelSpec::gaussian(1.0);
    let (mu, s) = worst_case_pattern(10, 3.5, 0.3, 0.0, 1).unwrap();
    let support = mu.locations();
    let rho: Vec<f64> = (0..support.len()).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let pairs = select_certificate_samples(&s, &support, 0.3, 0.05).unwrap();
    c.bench_function("certificate_build", |b| b.iter(|| build_certificate(&k, black_box(&support), &pairs, &rho).unwrap()));
    let cert = build_certificate(&k, &support, &pairs, &rho).unwrap();
    c.bench_function("certificate_verify", |b| b.iter(|| verify_certificate(black_box(&cert), &k, &support, 1e-3, 1e-2)));
}

criterion_group!(benches, tables, solver, certificate);
criterion_main!(benches);

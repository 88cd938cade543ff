// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ionpulse_core::codebook::request_hash;
use ionpulse_core::linalg::{annihilation, c, expm, kron, sigma_x, I};
use ionpulse_core::synth::{build_hamiltonian_cd, fidelity_and_gradient, initial_waveforms};
use ionpulse_core::{
    bundled_device, propagate, CircuitExporter, Codebook, FockSpace, GateRegistry, GateSpec, ModelSpec,
};

fn generator(n_max: usize) -> ionpulse_core::ComplexMatrix {
    let space = FockSpace::from_n_max(n_max).unwrap();
    let a = annihilation(space);
    let h = kron(&sigma_x(), &(&a + a.adjoint()));
    h * (-I * c(0.3, 0.0))
}

fn bench_expm(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("expm");
    for n_max in [7, 15, 31] {
        let m = generator(n_max);
        group.bench_with_input(BenchmarkId::from_parameter(2 * (n_max + 1)), &m, |b, m| b.iter(|| expm(black_box(m))));
    }
    group.finish();
}

fn bench_propagate(cr: &mut Criterion) {
    let device = bundled_device("sydney_gkp_v1").unwrap();
    let gate = GateSpec::cd(c(1.0, 0.0)).unwrap();
    let model = ModelSpec { n_max: 15, num_tslots: 100, ..ModelSpec::default() };
    let problem = build_hamiltonian_cd(&gate, &device, &model).unwrap();
    let u = initial_waveforms(&problem, 0, None);
    cr.bench_function("propagate/cd_100_slots", |b| b.iter(|| propagate(&problem, black_box(&u))));
    cr.bench_function("fidelity_and_gradient/cd_100_slots", |b| {
        b.iter(|| fidelity_and_gradient(&problem, black_box(&u)))
    });
}

fn bench_hash(cr: &mut Criterion) {
    let device = bundled_device("sydney_gkp_v1").unwrap();
    let registry = GateRegistry::with_builtins();
    let gate = registry.normalize(&GateSpec::cd(c(1.7724538509055159, 0.25)).unwrap()).unwrap();
    let model = ModelSpec::default();
    cr.bench_function("request_hash", |b| b.iter(|| request_hash(black_box(&gate), &device, &model)));
}

fn bench_cached_assembly(cr: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let codebook = Arc::new(Codebook::new(dir.path(), Arc::new(GateRegistry::with_builtins())));
    let device = bundled_device("sydney_gkp_v1").unwrap();
    let model = ModelSpec { n_max: 6, num_tslots: 40, duration_us: 300.0, ..ModelSpec::default() };
    let build = || {
        let mut ex = CircuitExporter::new(Arc::clone(&codebook), device.clone()).with_model(model.clone());
        ex.add_cr(0.382).unwrap();
        ex.add_hadamard(0).unwrap();
        ex.add_cd(c(0.5, 0.0)).unwrap();
        ex
    };
    // warm the library so the measurement covers lookup and layout only
    build().assemble().unwrap();
    cr.bench_function("assemble/cached_3_entries", |b| b.iter(|| build().assemble().unwrap()));
}

criterion_group!(benches, bench_expm, bench_propagate, bench_hash, bench_cached_assembly);
criterion_main!(benches);

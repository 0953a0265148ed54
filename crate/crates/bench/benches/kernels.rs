// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Timings of the hot kernels: the fluctuation average, the Monte Carlo
//! sampler, Hermitian propagation, Lindblad integration, the classical
//! solver and the ideal protocol.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use noonforge::dynamics::classical::classical_steady_state;
use noonforge::dynamics::master::{evolve_master, EvolutionSpec};
use noonforge::dynamics::unitary::Propagator;
use noonforge::fluctuations::{analytic_avg_overlap, mc_fidelity, FluctuationSpec};
use noonforge::fock::ladder_op;
use noonforge::hamiltonians::h_antinode;
use noonforge::protocol::{initial_state, protocol_layout, run_noon_ideal};
use noonforge::{basis_state, Mode, ModeLayout, PhysicalParams};

fn fluctuations(c: &mut Criterion) {
    let spec = FluctuationSpec::from_percent(1.0).unwrap();
    let mut g = c.benchmark_group("analytic_avg_overlap");
    for n in [10usize, 40, 120] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| analytic_avg_overlap(black_box(n), &spec).unwrap())
        });
    }
    g.finish();

    c.bench_function("mc_fidelity/N=20,1e4", |b| {
        b.iter(|| mc_fidelity(20, &spec, 10_000, black_box(42)).unwrap())
    });
}

fn propagation(c: &mut Criterion) {
    let p = PhysicalParams::paper_feasibility();
    let layout = ModeLayout::new(&[(Mode::A, 10), (Mode::B2, 4)], 3).unwrap();
    let h = h_antinode(&layout, &p).unwrap();
    c.bench_function("propagator/antinode_dim120", |b| {
        b.iter(|| Propagator::new(black_box(&h)).unwrap())
    });

    let layout = protocol_layout(4).unwrap();
    let psi = initial_state(&layout, 4).unwrap();
    let prop =
        Propagator::new(&noonforge::hamiltonians::h_jc_resonant(&layout, &p).unwrap()).unwrap();
    c.bench_function("propagator/evolve_protocol_N4", |b| {
        b.iter(|| prop.evolve(&psi, black_box(1e-6)).unwrap())
    });
}

fn master(c: &mut Criterion) {
    let mut p = PhysicalParams::paper_feasibility();
    p.omega_rabi = 1.0;
    p.nu = 10.0;
    p.delta2 = 2.0;
    let layout = ModeLayout::new(&[(Mode::A, 4), (Mode::B2, 3)], 3).unwrap();
    let h = h_antinode(&layout, &p).unwrap();
    let jumps = vec![
        (ladder_op(&layout, Mode::A).unwrap(), 0.05),
        (ladder_op(&layout, Mode::B2).unwrap(), 0.1),
    ];
    let spec = EvolutionSpec::new(h, jumps, 2.0);
    let rho0 = basis_state(&layout, &[(Mode::A, 1), (Mode::B2, 1)], 0)
        .unwrap()
        .to_density();
    let mut g = c.benchmark_group("evolve_master");
    g.sample_size(10);
    g.bench_function("antinode_dim36", |b| {
        b.iter(|| evolve_master(black_box(&spec), &rho0).unwrap())
    });
    g.finish();
}

fn classical(c: &mut Criterion) {
    let p = PhysicalParams::paper_feasibility();
    c.bench_function("classical_steady_state/preset", |b| {
        b.iter(|| classical_steady_state(black_box(&p)).unwrap())
    });
}

fn protocol(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_noon_ideal");
    for n in [1usize, 4, 6] {
        let layout = protocol_layout(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| run_noon_ideal(black_box(n), &layout).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    fluctuations,
    propagation,
    master,
    classical,
    protocol
);
criterion_main!(benches);

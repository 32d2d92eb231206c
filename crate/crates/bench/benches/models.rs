use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use atomtrap::analysis::fit_doppler_sigma;
use atomtrap::angular::{clebsch_gordan, wigner_6j, AngMom};
use atomtrap::bloch::{four_level_g2, two_level_obe_g2, FourLevelParams, TwoLevelParams};
use atomtrap::coherent::{stirap_evolve, PulseSchedule, PureState, LAMBDA_LABELS};
use atomtrap::loading::{stationary_distribution, LoadingParams};
use atomtrap_bench::{doppler_pair, tau_grid};

const MHZ: f64 = 2.0 * PI * 1e6;

fn angular(c: &mut Criterion) {
    let j = |t| AngMom::new(t);
    c.bench_function("wigner_6j", |b| b.iter(|| wigner_6j(j(3), j(3), j(2), j(4), j(4), j(1)).unwrap()));
    c.bench_function("clebsch_gordan", |b| b.iter(|| clebsch_gordan(j(3), black_box(1), j(2), 0, j(5), 1).unwrap()));
}

fn correlations(c: &mut Criterion) {
    let tau = tau_grid(100.0, 0.5);
    let two = TwoLevelParams::new(30.0 * MHZ, -10.0 * MHZ, 6.065 * MHZ).unwrap();
    c.bench_function("two_level_obe_g2", |b| b.iter(|| two_level_obe_g2(&two, black_box(&tau)).unwrap()));
    let four = FourLevelParams::new(103.0, 12.0, -31.0 * MHZ);
    let mut g = c.benchmark_group("four_level");
    g.sample_size(10);
    g.bench_function("four_level_g2", |b| b.iter(|| four_level_g2(&four, black_box(&tau)).unwrap()));
    g.finish();
}

fn stirap(c: &mut Criterion) {
    let omega0 = 2.0 * PI * 20e6;
    let sched = PulseSchedule::counter_intuitive(omega0, 50.0 / omega0).unwrap();
    let start = PureState::basis(1, &LAMBDA_LABELS).unwrap();
    let mut g = c.benchmark_group("stirap");
    g.sample_size(10);
    g.bench_function("stirap_evolve", |b| b.iter(|| stirap_evolve(&sched, &start, [0.0, 0.0], 0.0).unwrap()));
    g.finish();
}

fn loading(c: &mut Criterion) {
    let p = LoadingParams::new(1.0, 0.2, 5e-16, 1e-17, 40).unwrap();
    c.bench_function("stationary_distribution", |b| b.iter(|| stationary_distribution(black_box(&p)).unwrap()));
}

fn spectra(c: &mut Criterion) {
    let (reference, broadened) = doppler_pair(601, 0.107);
    let mut g = c.benchmark_group("spectra");
    g.sample_size(10);
    g.bench_function("fit_doppler_sigma", |b| b.iter(|| fit_doppler_sigma(&reference, &broadened).unwrap()));
    g.finish();
}

criterion_group!(models, angular, correlations, stirap, loading, spectra);
criterion_main!(models);

//! Run with: cargo bench -p chi2fc-bench

use std::f64::consts::PI;
use std::hint::black_box;

use chi2fc::{
    propagator_coeffs, rk4_propagator, sweep_length_rows, ConversionModel, NoiseChannel,
    NoiseModel, PeakSearch, PhysicalConfig, PulseTrainSpec, WidthConvention, SPEED_OF_LIGHT,
};
use criterion::{criterion_group, criterion_main, Criterion};

const OMEGA0: f64 = 2.0 * PI * 0.6e9;

fn setup() -> (PhysicalConfig, PulseTrainSpec, NoiseModel) {
    let vg = SPEED_OF_LIGHT / 2.2;
    let cfg = PhysicalConfig::new(0.5 * PI * vg / OMEGA0, vg, vg, OMEGA0, 0.0).unwrap();
    let pulses =
        PulseTrainSpec::with_width(10, 1e-7, 1e-9, WidthConvention::IntensityFwhm).unwrap();
    let noise = NoiseModel::new(
        vec![NoiseChannel::loss("loss", 0.03 * OMEGA0).unwrap()],
        vec![
            NoiseChannel::loss("loss", 0.03 * OMEGA0).unwrap(),
            NoiseChannel::gain("raman", 0.06 * OMEGA0).unwrap(),
        ],
        5e10,
    )
    .unwrap();
    (cfg, pulses, noise)
}

fn bench_propagator(c: &mut Criterion) {
    c.bench_function("propagator_coeffs/trig", |b| {
        b.iter(|| propagator_coeffs(black_box(1.0), 0.3, 0.03, 0.03, black_box(1.5)))
    });
    c.bench_function("propagator_coeffs/hyper", |b| {
        b.iter(|| propagator_coeffs(black_box(1.0), 0.3, 2.5, -0.5, black_box(1.5)))
    });
    c.bench_function("rk4_propagator/h=1e-3", |b| {
        b.iter(|| rk4_propagator(black_box(1.0), 0.3, 0.03, 0.03, 1.5, 1e-3))
    });
}

fn bench_model(c: &mut Criterion) {
    let (cfg, pulses, noise) = setup();
    c.bench_function("ConversionModel::new (with noise quadrature)", |b| {
        b.iter(|| ConversionModel::new(cfg.clone(), noise.clone(), pulses).unwrap())
    });
    let model = ConversionModel::new(cfg.clone(), noise.clone(), pulses).unwrap();
    let t = model.arrival(5);
    c.bench_function("g2 at interior pulse", |b| {
        b.iter(|| model.g2(black_box(t), black_box(1e-7)).unwrap())
    });
    let lengths: Vec<f64> = (1..=30)
        .map(|k| k as f64 * 0.1 * cfg.crystal_length)
        .collect();
    c.bench_function("sweep_length_rows/30 lengths", |b| {
        b.iter(|| {
            sweep_length_rows(&cfg, &pulses, &noise, &lengths, &PeakSearch::default()).unwrap()
        })
    });
}

criterion_group!(benches, bench_propagator, bench_model);
criterion_main!(benches);

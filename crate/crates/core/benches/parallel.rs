//! Parallel-vs-sequential comparison for the batch-style entry points.
//!
//! With the default `parallel` feature the library paths distribute over
//! rayon; the `sequential` variants here are hand-rolled loops over the
//! single-item operations, so one run shows both sides.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jja_core::fluxonium::{diagonalize, diagonalize_auto, spectrum_sweep, FluxoniumParams};
use jja_core::resonator::{fit_s21, fit_s21_batch, synthesize_trace, HangerFit, S21Trace};

fn sweep_inputs() -> (FluxoniumParams, Vec<f64>, Vec<(usize, usize)>) {
    let params = FluxoniumParams::new(2.59, 1.01, 0.42, 0.0).unwrap();
    let phis: Vec<f64> = (0..64)
        .map(|i| std::f64::consts::TAU * i as f64 / 63.0)
        .collect();
    (params, phis, vec![(0, 1), (0, 2), (0, 3)])
}

fn bench_spectrum_sweep(c: &mut Criterion) {
    let (params, phis, transitions) = sweep_inputs();
    // mirror the basis size the library path selects so both sides do
    // identical numerical work
    let dim = diagonalize_auto(&params.with_phi_ext(phis[0]))
        .unwrap()
        .dim_used;
    let mut group = c.benchmark_group("spectrum_sweep_64pts");
    group.sample_size(10);

    group.bench_function(BenchmarkId::new("library", "parallel-feature"), |b| {
        b.iter(|| spectrum_sweep(&params, &phis, &transitions).unwrap())
    });
    group.bench_function(BenchmarkId::new("loop", "sequential"), |b| {
        b.iter(|| {
            let mut out = Vec::with_capacity(phis.len());
            for &phi in &phis {
                let sol = diagonalize(&params.with_phi_ext(phi), dim).unwrap();
                out.push(
                    transitions
                        .iter()
                        .map(|&(i, j)| sol.transition_ghz(i, j))
                        .collect::<Vec<_>>(),
                );
            }
            out
        })
    });
    group.finish();
}

fn trace_batch() -> Vec<S21Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..8)
        .map(|k| {
            let fit = HangerFit {
                f0: 5.0e9 + k as f64 * 0.2e9,
                q_i: 5.0e4,
                q_e: 9.0e4,
                phi_asym: 0.1,
                amplitude: 0.9,
                phase_offset: 0.2,
                delay: 25e-9,
            };
            let lw = fit.f0 / fit.q_total();
            let freqs: Vec<f64> = (0..1601)
                .map(|i| fit.f0 - 4.0 * lw + i as f64 * 8.0 * lw / 1600.0)
                .collect();
            synthesize_trace(&fit, &freqs, 2e-3, &mut rng).unwrap()
        })
        .collect()
}

fn bench_s21_batch(c: &mut Criterion) {
    let traces = trace_batch();
    let mut group = c.benchmark_group("s21_fit_8_traces");
    group.sample_size(10);

    group.bench_function(BenchmarkId::new("library", "parallel-feature"), |b| {
        b.iter(|| {
            fit_s21_batch(&traces)
                .into_iter()
                .map(|r| r.unwrap().fit.q_i)
                .sum::<f64>()
        })
    });
    group.bench_function(BenchmarkId::new("loop", "sequential"), |b| {
        b.iter(|| {
            traces
                .iter()
                .map(|t| fit_s21(t).unwrap().fit.q_i)
                .sum::<f64>()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_spectrum_sweep, bench_s21_batch);
criterion_main!(benches);

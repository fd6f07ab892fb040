use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nlse_core::regression::{metrics, nll, nll_gradient, GaussianPrediction};
use nlse_core::Triplet;

fn prediction(i: usize) -> GaussianPrediction {
    let f = i as f64;
    GaussianPrediction::new(
        [(f * 0.37).sin() * 0.5 + 0.5, 0.5, (f * 0.11).cos() * 0.5 + 0.5],
        [-2.0, -1.5, -2.5, 0.1 * (f * 0.7).sin(), 0.05, -0.02],
    )
}

fn loss(c: &mut Criterion) {
    let preds: Vec<GaussianPrediction> = (0..4096).map(prediction).collect();
    let xs: Vec<Triplet> = (0..4096).map(|i| [(i % 50) as f64 / 49.0, 0.25, 0.75]).collect();
    c.bench_function("nll batch 4096", |b| {
        b.iter(|| {
            xs.iter()
                .zip(&preds)
                .map(|(x, p)| nll(black_box(x), p).unwrap())
                .sum::<f64>()
        })
    });
    c.bench_function("nll gradient batch 4096", |b| {
        b.iter(|| {
            xs.iter()
                .zip(&preds)
                .map(|(x, p)| nll_gradient(black_box(x), p).unwrap()[0])
                .sum::<f64>()
        })
    });
}

fn evaluation(c: &mut Criterion) {
    let truths: Vec<Triplet> = (0..12_500).map(|i| [(i % 50) as f64 / 49.0, ((i / 50) % 50) as f64 / 49.0, 0.5]).collect();
    let preds: Vec<Triplet> = truths
        .iter()
        .enumerate()
        .map(|(i, t)| t.map(|v| v + 0.03 * ((i * 7919 % 101) as f64 / 50.0 - 1.0)))
        .collect();
    c.bench_function("metrics 12500 rows", |b| b.iter(|| metrics(black_box(&preds), &truths).unwrap()));
}

criterion_group!(benches, loss, evaluation);
criterion_main!(benches);

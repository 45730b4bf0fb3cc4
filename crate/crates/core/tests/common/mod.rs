#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn white_noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_walk(rng: &mut ChaCha8Rng, n: usize, step: f64) -> Vec<f64> {
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(rng);
            level += step * e;
            level
        })
        .collect()
}

pub fn tones(n: usize, periods: &[f64], amps: &[f64], phases: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|t| {
            periods
                .iter()
                .zip(amps)
                .zip(phases)
                .map(|((p, a), ph)| a * (2.0 * PI * t as f64 / p + ph).sin())
                .sum()
        })
        .collect()
}

/// Random mixture of tones, a polynomial trend and noise.
pub fn mixed_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let k = rng.random_range(1..=4);
    let periods: Vec<f64> = (0..k)
        .map(|_| rng.random_range(3.0..(n as f64 / 3.0)))
        .collect();
    let amps: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..5.0)).collect();
    let phases: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let slope = rng.random_range(-0.05..0.05);
    let curve = rng.random_range(-1e-4..1e-4);
    let offset = rng.random_range(-100.0..100.0);
    let noise = rng.random_range(0.0..1.0);
    let base = tones(n, &periods, &amps, &phases);
    base.into_iter()
        .enumerate()
        .map(|(t, v)| {
            let t = t as f64;
            let e: f64 = StandardNormal.sample(rng);
            v + offset + slope * t + curve * t * t + noise * e
        })
        .collect()
}

/// Textbook Pearson correlation with 1/T moments, written out term by term.
pub fn brute_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let t = x.len() as f64;
    let mx = x.iter().sum::<f64>() / t;
    let my = y.iter().sum::<f64>() / t;
    let sx = (x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / t).sqrt();
    let sy = (y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / t).sqrt();
    if sx == 0.0 || sy == 0.0 {
        return None;
    }
    let mut acc = 0.0;
    for i in 0..x.len() {
        acc += (x[i] - mx) * (y[i] - my) / (sx * sy);
    }
    Some(acc / t)
}

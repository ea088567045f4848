#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turbofec_sim::channel::{FadingProcess, SINUSOIDS};

/// Kolmogorov-Smirnov distance between `samples` and the Rayleigh envelope
/// of a complex gain with mean power `power`.
pub fn ks_rayleigh(samples: &mut [f64], power: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = 1.0 - (-r * r / power).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Critical KS distance for large `n`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

/// Envelope of a unit-power fading tap, one sample per independent
/// realization at a random time.
pub fn rayleigh_envelopes(n: usize, doppler_hz: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = FadingProcess::new(&[1.0], doppler_hz, SINUSOIDS, &mut rng);
            let t = rng.random_range(0.0..1000.0 / doppler_hz);
            p.gain(0, t).norm()
        })
        .collect()
}

/// Ensemble normalized autocorrelation `E[Re g(t) g*(t + tau)]` of a
/// unit-power tap at each lag.
pub fn autocorrelation(lags: &[f64], doppler_hz: f64, realizations: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0.0; lags.len()];
    for _ in 0..realizations {
        let p = FadingProcess::new(&[1.0], doppler_hz, SINUSOIDS, &mut rng);
        let t0 = rng.random_range(0.0..100.0 / doppler_hz);
        let g0 = p.gain(0, t0);
        for (a, &tau) in acc.iter_mut().zip(lags) {
            *a += (g0 * p.gain(0, t0 + tau).conj()).re;
        }
    }
    acc.iter().map(|a| a / realizations as f64).collect()
}

/// One-sided paired z-test that the mean of `a - b` is positive; returns
/// `(mean difference, p-value)`.
pub fn paired_z(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return (mean, if mean > 0.0 { 0.0 } else { 1.0 });
    }
    let z = mean / (var / n).sqrt();
    (mean, 0.5 * libm::erfc(z / std::f64::consts::SQRT_2))
}

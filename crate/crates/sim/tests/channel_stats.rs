mod common;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use turbofec_sim::channel::{
    apply_channel, build_profile, frequency_response, noise_variance, ChannelRealization,
    FadingProcess, ProfileName, SINUSOIDS,
};
use turbofec_sim::modem::{map_symbols, zf_equalize, Modulation, Ofdm, OfdmConfig};

#[test]
fn envelope_is_rayleigh() {
    let n = 1_000_000;
    let mut env = common::rayleigh_envelopes(n, 69.5, 5);
    let d = common::ks_rayleigh(&mut env, 1.0);
    assert!(d < common::ks_critical(n, 0.01), "D = {d}");
}

#[test]
fn autocorrelation_follows_bessel_j0() {
    let fd = 6.95;
    let lags: Vec<f64> = (0..=25).map(|i| i as f64 * 0.02 / fd).collect();
    let acf = common::autocorrelation(&lags, fd, 20_000, 6);
    for (&tau, &r) in lags.iter().zip(&acf) {
        let want = libm::j0(2.0 * PI * fd * tau);
        assert!((r - want).abs() <= 0.05, "tau {tau}: {r} vs {want}");
    }
}

/// 10^4 realizations of the EVA profile sampled 100 times each, one second
/// apart.
fn eva_samples() -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let profile = build_profile(ProfileName::Eva, 30.0, 2.5e9).unwrap();
    let powers = profile.linear_powers();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut samples = vec![Vec::new(); powers.len()];
    let mut g = vec![Complex64::new(0.0, 0.0); powers.len()];
    for _ in 0..10_000 {
        let p = FadingProcess::new(&powers, profile.doppler_hz, SINUSOIDS, &mut rng);
        let t0 = rng.random_range(0.0..1.0);
        for i in 0..100 {
            p.gains_at(t0 + i as f64, &mut g);
            for (s, &x) in samples.iter_mut().zip(&g) {
                s.push(x);
            }
        }
    }
    (powers, samples)
}

#[test]
fn tap_powers_and_independence() {
    let (powers, samples) = eva_samples();
    let n = samples[0].len() as f64;
    assert_eq!(n, 1e6);
    for (l, s) in samples.iter().enumerate() {
        let p = s.iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
        assert!((p / powers[l] - 1.0).abs() < 0.01, "tap {l}: {p} vs {}", powers[l]);
    }
    for a in 0..samples.len() {
        for b in a + 1..samples.len() {
            let c: Complex64 = samples[a].iter().zip(&samples[b]).map(|(x, y)| x * y.conj()).sum::<Complex64>() / n;
            let rho = c.norm() / (powers[a] * powers[b]).sqrt();
            assert!(rho < 0.02, "taps {a},{b}: {rho}");
        }
    }
}

/// Holding the gain over one OFDM symbol changes it by far less than its
/// power at 30 km/h.
#[test]
fn drift_within_a_symbol_is_small() {
    let cfg = OfdmConfig::default();
    let fd = build_profile(ProfileName::Eva, 30.0, cfg.carrier_freq).unwrap().doppler_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let len = cfg.symbol_len();
    let mid = len as f64 / (2.0 * cfg.sampling_rate);
    let mut err = vec![0.0; len];
    let mut power = 0.0;
    for _ in 0..2000 {
        let p = FadingProcess::new(&[1.0], fd, SINUSOIDS, &mut rng);
        let t0 = rng.random_range(0.0..10.0);
        let gm = p.gain(0, t0 + mid);
        power += gm.norm_sqr();
        for (n, e) in err.iter_mut().enumerate() {
            *e += (p.gain(0, t0 + n as f64 / cfg.sampling_rate) - gm).norm_sqr();
        }
    }
    let worst = err.iter().fold(0.0f64, |a, &b| a.max(b)) / power;
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn zero_speed_profile_is_static() {
    let profile = build_profile(ProfileName::Epa, 0.0, 2.5e9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = FadingProcess::new(&profile.linear_powers(), 0.0, SINUSOIDS, &mut rng);
    for l in 0..p.num_taps() {
        assert_eq!(p.gain(l, 0.0), p.gain(l, 3.7));
    }
}

#[test]
fn measured_snr_matches_setting() {
    let cfg = OfdmConfig::default();
    let ofdm = Ofdm::new(cfg).unwrap();
    let symbols = 3334;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let bits: Vec<u8> = (0..symbols * cfg.used_subcarriers * 2).map(|_| rng.random_range(0..2u8)).collect();
    let x = map_symbols(&bits, Modulation::Qpsk).unwrap();
    let samples = ofdm.modulate(&x).unwrap();
    let flat = ChannelRealization::flat(samples.len(), cfg.symbol_len(), cfg.sampling_rate).unwrap();
    for snr in [0.0, 10.0, 20.0] {
        let y = ofdm.demodulate(&apply_channel(&samples, &flat, snr, &mut rng).unwrap()).unwrap();
        let ps: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let pn: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum();
        let measured = 10.0 * (ps / pn).log10();
        assert!((measured - snr).abs() < 0.1, "{snr} dB measured as {measured}");
    }
}

#[test]
fn zero_forcing_scales_noise_by_inverse_gain() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let n = 100_000;
    let sigma2 = noise_variance(8.0);
    for h in [Complex64::new(1.0, 0.0), Complex64::from_polar(0.3, 1.1), Complex64::from_polar(2.0, -2.5)] {
        let x = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2);
        let y: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                h * x + Complex64::new(re, im) * (sigma2 / 2.0).sqrt()
            })
            .collect();
        let (z, erased) = zf_equalize(&y, &vec![h; n]).unwrap();
        assert!(erased.iter().all(|&e| !e));
        let var = z.iter().map(|v| (v - x).norm_sqr()).sum::<f64>() / n as f64;
        let want = sigma2 / h.norm_sqr();
        assert!((var / want - 1.0).abs() < 0.02, "|h| {}: {var} vs {want}", h.norm());
    }
}

/// A static two-tap channel seen through the OFDM modem equals the tap
/// gains' transform, which equals the reported frequency response.
#[test]
fn two_tap_response_through_the_modem() {
    let cfg = OfdmConfig::default();
    let ofdm = Ofdm::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let process = FadingProcess::new(&[0.7, 0.3], 0.0, SINUSOIDS, &mut rng);
    let delays = vec![0, 9];
    let g = [process.gain(0, 0.0), process.gain(1, 0.0)];
    let symbols = 3;
    let real = ChannelRealization::new(process, delays.clone(), cfg.sampling_rate, symbols * cfg.symbol_len(), cfg.symbol_len()).unwrap();
    let bits: Vec<u8> = (0..symbols * cfg.used_subcarriers * 2).map(|_| rng.random_range(0..2u8)).collect();
    let x = map_symbols(&bits, Modulation::Qpsk).unwrap();
    let y = ofdm.demodulate(&apply_channel(&ofdm.modulate(&x).unwrap(), &real, f64::INFINITY, &mut rng).unwrap()).unwrap();
    let ks = cfg.subcarrier_indices();
    for s in 0..symbols {
        let h = frequency_response(&real, &cfg, s).unwrap();
        for (i, &k) in ks.iter().enumerate() {
            let phase = -2.0 * PI * k as f64 * delays[1] as f64 / cfg.fft_size as f64;
            let want = g[0] + g[1] * Complex64::from_polar(1.0, phase);
            assert!((h[i] - want).norm() < 1e-12);
            let idx = s * cfg.used_subcarriers + i;
            assert!((y[idx] / x[idx] - want).norm() < 1e-9, "symbol {s} subcarrier {k}");
        }
    }
}

//! Tapped-delay-line Rayleigh fading (extended ITU Pedestrian A and
//! Vehicular A) with additive white Gaussian noise.
//!
//! Each tap is an independent sum-of-sinusoids Clarke process in the form of
//! Zheng and Xiao: with `M` oscillators, arrival angles
//! `a_n = (2 pi n - pi + theta) / (4 M)` and independent uniform phases,
//!
//! ```text
//! g(t) = sqrt(P / M) * ( sum cos(w_d t cos a_n + phi_n) + j sum sin(w_d t sin a_n + psi_n) )
//! ```
//!
//! which has mean power `P` and autocorrelation `P J0(w_d tau)`.
//!
//! SNR is the mean received power per used subcarrier over the noise power
//! per subcarrier. Profiles are normalized to unit total power and
//! constellations to unit energy, so the noise variance per subcarrier (and,
//! with unitary transforms, per time sample) is `10^(-SNR/10)`. For Eb/N0
//! subtract `10 log10(bits per symbol * code rate)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::modem::OfdmConfig;

/// Oscillators per tap. With 64 the envelope distribution is measurably
/// off Rayleigh at a million samples; 128 is not.
pub const SINUSOIDS: usize = 128;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileName {
    Epa,
    Eva,
}

impl ProfileName {
    /// Terminal speed used with this profile unless overridden.
    pub fn default_speed_kmh(self) -> f64 {
        match self {
            ProfileName::Epa => 3.0,
            ProfileName::Eva => 30.0,
        }
    }
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileName::Epa => "epa",
            ProfileName::Eva => "eva",
        })
    }
}

impl FromStr for ProfileName {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epa" | "peda" | "ped-a" => Ok(ProfileName::Epa),
            "eva" | "veha" | "veh-a" => Ok(ProfileName::Eva),
            _ => Err(SimError::config("channel", format!("unknown profile {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay_ns: f64,
    pub power_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdlProfile {
    pub name: ProfileName,
    pub taps: Vec<Tap>,
    pub doppler_hz: f64,
}

const EPA: [(f64, f64); 7] = [
    (0.0, 0.0),
    (30.0, -1.0),
    (70.0, -2.0),
    (90.0, -3.0),
    (110.0, -8.0),
    (190.0, -17.2),
    (410.0, -20.8),
];

const EVA: [(f64, f64); 9] = [
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
];

/// Maximum Doppler shift `v f_c / c`.
pub fn doppler_frequency(speed_kmh: f64, carrier_freq: f64) -> f64 {
    speed_kmh / 3.6 * carrier_freq / SPEED_OF_LIGHT
}

pub fn build_profile(name: ProfileName, speed_kmh: f64, carrier_freq: f64) -> SimResult<TdlProfile> {
    if !(speed_kmh >= 0.0) || !speed_kmh.is_finite() {
        return Err(SimError::config("speed", format!("{speed_kmh} km/h")));
    }
    if !(carrier_freq > 0.0) {
        return Err(SimError::config("carrier_freq", format!("{carrier_freq} Hz")));
    }
    let table: &[(f64, f64)] = match name {
        ProfileName::Epa => &EPA,
        ProfileName::Eva => &EVA,
    };
    Ok(TdlProfile {
        name,
        taps: table
            .iter()
            .map(|&(delay_ns, power_db)| Tap { delay_ns, power_db })
            .collect(),
        doppler_hz: doppler_frequency(speed_kmh, carrier_freq),
    })
}

impl TdlProfile {
    /// Linear tap powers scaled to sum to one.
    pub fn linear_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.taps.iter().map(|t| 10f64.powf(t.power_db / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }

    /// Tap delays rounded to the nearest sample.
    pub fn delays_in_samples(&self, sampling_rate: f64) -> Vec<usize> {
        self.taps
            .iter()
            .map(|t| (t.delay_ns * 1e-9 * sampling_rate).round() as usize)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct TapOscillators {
    amp: f64,
    w_c: Vec<f64>,
    phi_c: Vec<f64>,
    w_s: Vec<f64>,
    phi_s: Vec<f64>,
    constant: Complex64,
}

impl TapOscillators {
    fn gain(&self, t: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for n in 0..self.w_c.len() {
            re += (self.w_c[n] * t + self.phi_c[n]).cos();
            im += (self.w_s[n] * t + self.phi_s[n]).sin();
        }
        self.constant + Complex64::new(re, im) * self.amp
    }
}

/// Continuous-time complex gains of independent fading taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProcess {
    doppler_hz: f64,
    taps: Vec<TapOscillators>,
}

impl FadingProcess {
    /// Independent Rayleigh taps with mean powers `powers`.
    pub fn new<R: Rng + ?Sized>(powers: &[f64], doppler_hz: f64, sinusoids: usize, rng: &mut R) -> Self {
        let m = sinusoids.max(1);
        let wd = 2.0 * PI * doppler_hz;
        let taps = powers
            .iter()
            .map(|&p| {
                let theta = rng.random_range(-PI..PI);
                let mut osc = TapOscillators {
                    amp: (p / m as f64).sqrt(),
                    w_c: Vec::with_capacity(m),
                    phi_c: Vec::with_capacity(m),
                    w_s: Vec::with_capacity(m),
                    phi_s: Vec::with_capacity(m),
                    constant: Complex64::new(0.0, 0.0),
                };
                for n in 1..=m {
                    let a = (2.0 * PI * n as f64 - PI + theta) / (4.0 * m as f64);
                    osc.w_c.push(wd * a.cos());
                    osc.w_s.push(wd * a.sin());
                    osc.phi_c.push(rng.random_range(-PI..PI));
                    osc.phi_s.push(rng.random_range(-PI..PI));
                }
                osc
            })
            .collect();
        Self { doppler_hz, taps }
    }

    /// A single non-fading tap of unit gain.
    pub fn unit() -> Self {
        Self {
            doppler_hz: 0.0,
            taps: vec![TapOscillators {
                amp: 0.0,
                w_c: Vec::new(),
                phi_c: Vec::new(),
                w_s: Vec::new(),
                phi_s: Vec::new(),
                constant: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn doppler_hz(&self) -> f64 {
        self.doppler_hz
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn gain(&self, tap: usize, t: f64) -> Complex64 {
        self.taps[tap].gain(t)
    }

    pub fn gains_at(&self, t: f64, out: &mut [Complex64]) {
        for (o, tap) in out.iter_mut().zip(&self.taps) {
            *o = tap.gain(t);
        }
    }
}

/// Tap gains over a span of samples, held constant over segments of `hold`
/// samples and evaluated at each segment's midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    process: FadingProcess,
    delays: Vec<usize>,
    sampling_rate: f64,
    len: usize,
    hold: usize,
    gains: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn new(
        process: FadingProcess,
        delays: Vec<usize>,
        sampling_rate: f64,
        len: usize,
        hold: usize,
    ) -> SimResult<Self> {
        if len == 0 || hold == 0 {
            return Err(SimError::input("empty channel realization"));
        }
        if delays.len() != process.num_taps() {
            return Err(SimError::input("one delay per tap is required"));
        }
        let taps = delays.len();
        let segments = len.div_ceil(hold);
        let mut gains = vec![Complex64::new(0.0, 0.0); segments * taps];
        for (s, chunk) in gains.chunks_exact_mut(taps).enumerate() {
            let t = (s * hold) as f64 / sampling_rate + hold as f64 / (2.0 * sampling_rate);
            process.gains_at(t, chunk);
        }
        Ok(Self {
            process,
            delays,
            sampling_rate,
            len,
            hold,
            gains,
        })
    }

    /// Unit-gain single-tap channel (noise only).
    pub fn flat(len: usize, hold: usize, sampling_rate: f64) -> SimResult<Self> {
        Self::new(FadingProcess::unit(), vec![0], sampling_rate, len, hold)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn process(&self) -> &FadingProcess {
        &self.process
    }

    /// Tap gains applied at sample `n`.
    pub fn gains_at_sample(&self, n: usize) -> &[Complex64] {
        let taps = self.delays.len();
        let s = n / self.hold;
        &self.gains[s * taps..(s + 1) * taps]
    }

    /// Gain time series of one tap, one value per sample.
    pub fn tap_series(&self, tap: usize) -> Vec<Complex64> {
        (0..self.len).map(|n| self.gains_at_sample(n)[tap]).collect()
    }
}

/// Per-sample fading over `duration_samples`.
pub fn generate_fading(
    profile: &TdlProfile,
    duration_samples: usize,
    sampling_rate: f64,
    seed: u64,
) -> SimResult<ChannelRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let process = FadingProcess::new(&profile.linear_powers(), profile.doppler_hz, SINUSOIDS, &mut rng);
    ChannelRealization::new(
        process,
        profile.delays_in_samples(sampling_rate),
        sampling_rate,
        duration_samples,
        1,
    )
}

/// Fading held constant over each OFDM symbol (block fading), sampled at
/// the symbol midpoint.
pub fn generate_block_fading<R: Rng + ?Sized>(
    profile: &TdlProfile,
    cfg: &OfdmConfig,
    ofdm_symbols: usize,
    rng: &mut R,
) -> SimResult<ChannelRealization> {
    let process = FadingProcess::new(&profile.linear_powers(), profile.doppler_hz, SINUSOIDS, rng);
    ChannelRealization::new(
        process,
        profile.delays_in_samples(cfg.sampling_rate),
        cfg.sampling_rate,
        ofdm_symbols * cfg.symbol_len(),
        cfg.symbol_len(),
    )
}

/// Noise variance per sample for `snr_db`; zero when the SNR is infinite.
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// Time-varying tapped-delay convolution plus complex AWGN.
pub fn apply_channel<R: Rng + ?Sized>(
    samples: &[Complex64],
    realization: &ChannelRealization,
    snr_db: f64,
    rng: &mut R,
) -> SimResult<Vec<Complex64>> {
    if samples.len() != realization.len() {
        return Err(SimError::input(format!(
            "{} samples but the realization spans {}",
            samples.len(),
            realization.len()
        )));
    }
    if snr_db.is_nan() {
        return Err(SimError::config("snr", "NaN"));
    }
    let sigma = (noise_variance(snr_db) / 2.0).sqrt();
    let mut out = Vec::with_capacity(samples.len());
    for n in 0..samples.len() {
        let g = realization.gains_at_sample(n);
        let mut y = Complex64::new(0.0, 0.0);
        for (&d, &gain) in realization.delays.iter().zip(g) {
            if d <= n {
                y += gain * samples[n - d];
            }
        }
        if sigma > 0.0 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            y += Complex64::new(re, im) * sigma;
        }
        out.push(y);
    }
    Ok(out)
}

/// Ideal channel state: transform of the tap gains at the midpoint of OFDM
/// symbol `symbol_index`, one value per used subcarrier.
pub fn frequency_response(
    realization: &ChannelRealization,
    cfg: &OfdmConfig,
    symbol_index: usize,
) -> SimResult<Vec<Complex64>> {
    let len = cfg.symbol_len();
    if (symbol_index + 1) * len > realization.len() {
        return Err(SimError::input(format!(
            "OFDM symbol {symbol_index} lies outside the realization"
        )));
    }
    let t = (symbol_index * len) as f64 / realization.sampling_rate
        + len as f64 / (2.0 * realization.sampling_rate);
    let mut g = vec![Complex64::new(0.0, 0.0); realization.delays.len()];
    realization.process.gains_at(t, &mut g);
    let n = cfg.fft_size as f64;
    Ok(cfg
        .subcarrier_indices()
        .into_iter()
        .map(|k| {
            realization
                .delays
                .iter()
                .zip(&g)
                .map(|(&d, &gain)| gain * Complex64::from_polar(1.0, -2.0 * PI * (k as f64) * d as f64 / n))
                .sum()
        })
        .collect())
}

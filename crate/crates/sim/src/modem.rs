//! Gray-mapped QPSK/16QAM, max-log soft demapping, OFDM and zero-forcing
//! equalization.
//!
//! Labelings (bits listed first to last, unit average energy):
//!
//! ```text
//! QPSK   b0 b1        ->  ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)
//! 16QAM  b0 b1 b2 b3  ->  ((1 - 2 b0)(1 + 2 b2) + j (1 - 2 b1)(1 + 2 b3)) / sqrt(10)
//! ```
//!
//! so on each axis of 16QAM the levels `-3, -1, +1, +3` carry `11, 10, 00, 01`.
//!
//! LLRs follow the coding layer: `ln P(b = 1) / P(b = 0)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

/// Equalizer gains below this magnitude erase the subcarrier.
pub const ERASURE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    /// Constellation point of the label whose first bit is the MSB.
    pub fn point(self, label: usize) -> Complex64 {
        let bit = |i: usize| ((label >> (self.bits_per_symbol() - 1 - i)) & 1) as f64;
        match self {
            Modulation::Qpsk => {
                Complex64::new(1.0 - 2.0 * bit(0), 1.0 - 2.0 * bit(1)) * std::f64::consts::FRAC_1_SQRT_2
            }
            Modulation::Qam16 => {
                let s = 1.0 / 10f64.sqrt();
                Complex64::new(
                    (1.0 - 2.0 * bit(0)) * (1.0 + 2.0 * bit(2)) * s,
                    (1.0 - 2.0 * bit(1)) * (1.0 + 2.0 * bit(3)) * s,
                )
            }
        }
    }

    pub fn constellation(self) -> Vec<Complex64> {
        (0..1 << self.bits_per_symbol()).map(|l| self.point(l)).collect()
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
        })
    }
}

impl FromStr for Modulation {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            _ => Err(SimError::config("mod", format!("unknown modulation {s:?}"))),
        }
    }
}

pub fn map_symbols(bits: &[u8], scheme: Modulation) -> SimResult<Vec<Complex64>> {
    let bps = scheme.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(SimError::input(format!(
            "{} bits do not fill whole {scheme} symbols",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(bps)
        .map(|c| scheme.point(c.iter().fold(0, |acc, &b| acc << 1 | usize::from(b & 1))))
        .collect())
}

/// Max-log bit LLRs of one equalized symbol `z`:
/// `|h|^2 / noise_var * (min_{b=0} |z - x|^2 - min_{b=1} |z - x|^2)`.
pub fn demap_llr(
    z: Complex64,
    scheme: Modulation,
    h: Complex64,
    noise_var: f64,
    out: &mut [f64],
) -> SimResult<()> {
    if !(noise_var > 0.0) {
        return Err(SimError::input(format!("noise variance {noise_var} must be positive")));
    }
    let bps = scheme.bits_per_symbol();
    if out.len() != bps {
        return Err(SimError::input(format!("{scheme} demaps to {bps} LLRs")));
    }
    let scale = h.norm_sqr() / noise_var;
    let mut d0 = [f64::INFINITY; 4];
    let mut d1 = [f64::INFINITY; 4];
    for label in 0..1usize << bps {
        let d = (z - scheme.point(label)).norm_sqr();
        for i in 0..bps {
            let slot = if label >> (bps - 1 - i) & 1 == 1 { &mut d1[i] } else { &mut d0[i] };
            if d < *slot {
                *slot = d;
            }
        }
    }
    for i in 0..bps {
        out[i] = scale * (d0[i] - d1[i]);
    }
    Ok(())
}

/// Demaps a run of equalized symbols; erased symbols give zero LLRs.
pub fn demap_block(
    z: &[Complex64],
    h: &[Complex64],
    erased: &[bool],
    scheme: Modulation,
    noise_var: f64,
) -> SimResult<Vec<f64>> {
    if z.len() != h.len() || z.len() != erased.len() {
        return Err(SimError::input("symbol, gain and erasure vectors differ in length"));
    }
    let bps = scheme.bits_per_symbol();
    let mut out = vec![0.0; z.len() * bps];
    for (i, chunk) in out.chunks_exact_mut(bps).enumerate() {
        if !erased[i] {
            demap_llr(z[i], scheme, h[i], noise_var, chunk)?;
        }
    }
    Ok(out)
}

/// Nearest-point decisions.
pub fn hard_demap(z: &[Complex64], scheme: Modulation) -> Vec<u8> {
    let points = scheme.constellation();
    let bps = scheme.bits_per_symbol();
    let mut bits = Vec::with_capacity(z.len() * bps);
    for &s in z {
        let best = (0..points.len())
            .min_by(|&a, &b| (s - points[a]).norm_sqr().total_cmp(&(s - points[b]).norm_sqr()))
            .unwrap_or(0);
        bits.extend((0..bps).map(|i| (best >> (bps - 1 - i) & 1) as u8));
    }
    bits
}

/// `z = y / h` per subcarrier; gains below [`ERASURE_THRESHOLD`] are erased.
pub fn zf_equalize(y: &[Complex64], h: &[Complex64]) -> SimResult<(Vec<Complex64>, Vec<bool>)> {
    if y.len() != h.len() {
        return Err(SimError::input("received symbols and channel gains differ in length"));
    }
    let mut erased = vec![false; y.len()];
    let z = y
        .iter()
        .zip(h)
        .zip(erased.iter_mut())
        .map(|((&y, &h), e)| {
            if h.norm() < ERASURE_THRESHOLD {
                *e = true;
                Complex64::new(0.0, 0.0)
            } else {
                y / h
            }
        })
        .collect();
    Ok((z, erased))
}

/// OFDM numerology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    pub fft_size: usize,
    /// Used subcarriers, split evenly around the unused DC bin.
    pub used_subcarriers: usize,
    pub cp_length: usize,
    pub sampling_rate: f64,
    pub carrier_freq: f64,
    pub bandwidth: f64,
}

impl Default for OfdmConfig {
    /// 512 bins at 15 kHz spacing, 300 used, cyclic prefix of 1/8 symbol.
    fn default() -> Self {
        Self {
            fft_size: 512,
            used_subcarriers: 300,
            cp_length: 64,
            sampling_rate: 7.68e6,
            carrier_freq: 2.5e9,
            bandwidth: 5e6,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> SimResult<()> {
        if self.fft_size == 0 || self.used_subcarriers == 0 {
            return Err(SimError::config("ofdm", "empty transform"));
        }
        if self.used_subcarriers % 2 != 0 || self.used_subcarriers >= self.fft_size {
            return Err(SimError::config(
                "ofdm",
                "used subcarriers must be even and leave the DC bin free",
            ));
        }
        if self.cp_length > self.fft_size || !(self.sampling_rate > 0.0) {
            return Err(SimError::config("ofdm", "invalid cyclic prefix or sampling rate"));
        }
        Ok(())
    }

    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_length
    }

    pub fn symbol_duration(&self) -> f64 {
        self.symbol_len() as f64 / self.sampling_rate
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.sampling_rate / self.fft_size as f64
    }

    /// Signed frequency index of each used subcarrier, ascending:
    /// `-U/2 .. -1, 1 .. U/2`.
    pub fn subcarrier_indices(&self) -> Vec<i64> {
        let half = (self.used_subcarriers / 2) as i64;
        (-half..0).chain(1..=half).collect()
    }

    fn bin(&self, k: i64) -> usize {
        k.rem_euclid(self.fft_size as i64) as usize
    }
}

/// OFDM modulator/demodulator with unitary transforms (`1/sqrt(N)` both
/// ways), so energy per sample equals energy per subcarrier.
pub struct Ofdm {
    cfg: OfdmConfig,
    ifft: Arc<dyn Fft<f64>>,
    fft: Arc<dyn Fft<f64>>,
    bins: Vec<usize>,
}

impl fmt::Debug for Ofdm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ofdm").field("cfg", &self.cfg).finish()
    }
}

impl Ofdm {
    pub fn new(cfg: OfdmConfig) -> SimResult<Self> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            ifft: planner.plan_fft_inverse(cfg.fft_size),
            fft: planner.plan_fft_forward(cfg.fft_size),
            bins: cfg.subcarrier_indices().into_iter().map(|k| cfg.bin(k)).collect(),
            cfg,
        })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    /// OFDM symbols needed for `n` subcarrier symbols.
    pub fn symbols_for(&self, n: usize) -> usize {
        n.div_ceil(self.cfg.used_subcarriers)
    }

    /// Maps whole OFDM symbols of subcarrier values to time samples with
    /// cyclic prefix.
    pub fn modulate(&self, symbols: &[Complex64]) -> SimResult<Vec<Complex64>> {
        let u = self.cfg.used_subcarriers;
        if symbols.len() % u != 0 {
            return Err(SimError::input(format!(
                "{} symbols do not fill whole OFDM symbols of {u} subcarriers",
                symbols.len()
            )));
        }
        let n = self.cfg.fft_size;
        let cp = self.cfg.cp_length;
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = Vec::with_capacity(symbols.len() / u * (n + cp));
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for chunk in symbols.chunks_exact(u) {
            buf.fill(Complex64::new(0.0, 0.0));
            for (&b, &x) in self.bins.iter().zip(chunk) {
                buf[b] = x;
            }
            self.ifft.process(&mut buf);
            buf.iter_mut().for_each(|x| *x *= scale);
            out.extend_from_slice(&buf[n - cp..]);
            out.extend_from_slice(&buf);
        }
        Ok(out)
    }

    /// Removes cyclic prefixes and returns the used subcarrier values.
    pub fn demodulate(&self, samples: &[Complex64]) -> SimResult<Vec<Complex64>> {
        let len = self.cfg.symbol_len();
        if samples.len() % len != 0 {
            return Err(SimError::input(format!(
                "{} samples are not whole OFDM symbols of {len}",
                samples.len()
            )));
        }
        let n = self.cfg.fft_size;
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = Vec::with_capacity(samples.len() / len * self.cfg.used_subcarriers);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for chunk in samples.chunks_exact(len) {
            buf.copy_from_slice(&chunk[self.cfg.cp_length..]);
            self.fft.process(&mut buf);
            out.extend(self.bins.iter().map(|&b| buf[b] * scale));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_energy_and_gray_adjacency() {
        for m in [Modulation::Qpsk, Modulation::Qam16] {
            let pts = m.constellation();
            let e: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
            assert!((e - 1.0).abs() < 1e-12);
            let dmin = pts
                .iter()
                .enumerate()
                .flat_map(|(i, a)| pts[i + 1..].iter().map(move |b| (a - b).norm()))
                .fold(f64::INFINITY, f64::min);
            for (i, a) in pts.iter().enumerate() {
                for (j, b) in pts.iter().enumerate() {
                    if i != j && ((a - b).norm() - dmin).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "{m} labels {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn qpsk_labeling() {
        let s = map_symbols(&[0, 0, 1, 0], Modulation::Qpsk).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s[0] - c(r, r)).norm() < 1e-15);
        assert!((s[1] - c(-r, r)).norm() < 1e-15);
        assert!(map_symbols(&[0, 1, 1], Modulation::Qpsk).is_err());
    }

    #[test]
    fn hard_demap_inverts_mapping() {
        let bits: Vec<u8> = (0..64).map(|i| ((i * 7 + i / 3) % 2) as u8).collect();
        for m in [Modulation::Qpsk, Modulation::Qam16] {
            let s = map_symbols(&bits, m).unwrap();
            assert_eq!(hard_demap(&s, m), bits);
        }
    }

    #[test]
    fn qpsk_llr_closed_form() {
        let one = c(1.0, 0.0);
        let mut l = [0.0; 2];
        for z in [c(0.3, -0.9), c(-1.2, 0.1), c(0.0, 2.0)] {
            demap_llr(z, Modulation::Qpsk, one, 0.4, &mut l).unwrap();
            let k = 2.0 * 2f64.sqrt() / 0.4;
            assert!((l[0] + k * z.re).abs() < 1e-12);
            assert!((l[1] + k * z.im).abs() < 1e-12);
            let mut l2 = [0.0; 2];
            demap_llr(z, Modulation::Qpsk, one, 0.8, &mut l2).unwrap();
            assert_eq!([l2[0] * 2.0, l2[1] * 2.0], l);
        }
        assert!(demap_llr(one, Modulation::Qpsk, one, 0.0, &mut l).is_err());
    }

    #[test]
    fn llr_signs_on_constellation_points() {
        let mut l = [0.0; 4];
        let m = Modulation::Qam16;
        for label in 0..16 {
            demap_llr(m.point(label), m, c(0.7, 0.2), 0.5, &mut l).unwrap();
            for (i, &x) in l.iter().enumerate() {
                assert_eq!(x > 0.0, label >> (3 - i) & 1 == 1);
            }
        }
    }

    #[test]
    fn ofdm_round_trip_and_parseval() {
        let ofdm = Ofdm::new(OfdmConfig::default()).unwrap();
        let syms: Vec<Complex64> = (0..600).map(|i| c((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let x = ofdm.modulate(&syms).unwrap();
        assert_eq!(x.len(), 2 * 576);
        let back = ofdm.demodulate(&x).unwrap();
        for (a, b) in syms.iter().zip(&back) {
            assert!((a - b).norm() < 1e-10);
        }
        let e_f: f64 = syms[..300].iter().map(|s| s.norm_sqr()).sum();
        let e_t: f64 = x[64..576].iter().map(|s| s.norm_sqr()).sum();
        assert!((e_f - e_t).abs() < 1e-9);
    }

    #[test]
    fn single_subcarrier_is_a_complex_exponential() {
        let cfg = OfdmConfig::default();
        let ofdm = Ofdm::new(cfg).unwrap();
        let k = 17i64;
        let pos = cfg.subcarrier_indices().iter().position(|&i| i == k).unwrap();
        let mut syms = vec![c(0.0, 0.0); 300];
        syms[pos] = c(1.0, 0.0);
        let x = ofdm.modulate(&syms).unwrap();
        let n = cfg.fft_size as f64;
        for (i, &s) in x.iter().enumerate() {
            let t = i as f64 - cfg.cp_length as f64;
            let ph = 2.0 * std::f64::consts::PI * k as f64 * t / n;
            assert!((s - c(ph.cos(), ph.sin()) / n.sqrt()).norm() < 1e-12);
        }
    }

    #[test]
    fn zf_recovers_and_erases() {
        let y = [c(1.0, 2.0), c(0.5, 0.0)];
        let h = [c(0.0, 1.0), c(1e-13, 0.0)];
        let (z, e) = zf_equalize(&y, &h).unwrap();
        assert!((z[0] - c(2.0, -1.0)).norm() < 1e-15);
        assert_eq!(e, vec![false, true]);
    }
}

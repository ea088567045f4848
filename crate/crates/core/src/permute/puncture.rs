//! Parity puncturing for rate adaptation.
//!
//! Systematic bits are always sent. The parity slots of both constituent
//! encoders are kept according to a periodic mask over trellis steps. Tail
//! symbols of terminated codes are sent unpunctured after the data part,
//! encoder 1 first.
//!
//! Transmission order inside one step: systematic bits, kept parity bits of
//! encoder 1, kept parity bits of encoder 2.
//!
//! Masks (`1` keeps the slot):
//!
//! | code        | rate | period | encoder 1        | encoder 2        |
//! |-------------|------|--------|------------------|------------------|
//! | binary      | 1/3  | 1      | p: 1             | p: 1             |
//! | binary      | 1/2  | 2      | p: 10            | p: 01            |
//! | binary      | 2/3  | 4      | p: 1000          | p: 0010          |
//! | binary      | 3/4  | 6      | p: 100000        | p: 000100        |
//! | duo-binary  | 1/3  | 1      | Y: 1, W: 1       | Y: 1, W: 1       |
//! | duo-binary  | 1/2  | 1      | Y: 1, W: 0       | Y: 1, W: 0       |
//! | duo-binary  | 2/3  | 2      | Y: 10, W: 00     | Y: 01, W: 00     |
//! | duo-binary  | 3/4  | 3      | Y: 100, W: 000   | Y: 010, W: 000   |

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::trellis::CodeKind;

/// Code rate after puncturing (tail excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeRate {
    R1_3,
    R1_2,
    R2_3,
    R3_4,
}

impl CodeRate {
    pub fn fraction(self) -> (usize, usize) {
        match self {
            CodeRate::R1_3 => (1, 3),
            CodeRate::R1_2 => (1, 2),
            CodeRate::R2_3 => (2, 3),
            CodeRate::R3_4 => (3, 4),
        }
    }

    pub fn as_f64(self) -> f64 {
        let (n, d) = self.fraction();
        n as f64 / d as f64
    }
}

impl core::fmt::Display for CodeRate {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let (n, d) = self.fraction();
        write!(f, "{n}/{d}")
    }
}

impl core::str::FromStr for CodeRate {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1/3" => Ok(CodeRate::R1_3),
            "1/2" => Ok(CodeRate::R1_2),
            "2/3" => Ok(CodeRate::R2_3),
            "3/4" => Ok(CodeRate::R3_4),
            _ => Err(invalid!("unknown code rate {s:?}")),
        }
    }
}

/// The streams of one turbo codeword, as bits or as LLRs.
///
/// Parity vectors interleave the parity streams of one encoder per step
/// (`p0, p1, p0, p1, ...` for two parities).
#[derive(Debug, Clone, PartialEq)]
pub struct CodeStreams<T> {
    pub systematic: Vec<T>,
    pub parity1: Vec<T>,
    pub parity2: Vec<T>,
    pub tail1: Vec<T>,
    pub tail2: Vec<T>,
}

/// Periodic parity keep-mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturePattern {
    period: usize,
    bits_per_step: usize,
    parity_per_step: usize,
    /// `keep[(step * 2 + encoder) * parity_per_step + j]`
    keep: Vec<bool>,
    rate: (usize, usize),
}

impl PuncturePattern {
    /// The documented pattern for `kind` at `rate`.
    pub fn for_rate(kind: CodeKind, rate: CodeRate) -> Self {
        let (period, enc1, enc2): (usize, &[&[u8]], &[&[u8]]) = match (kind, rate) {
            (CodeKind::Binary, CodeRate::R1_3) => (1, &[&[1]], &[&[1]]),
            (CodeKind::Binary, CodeRate::R1_2) => (2, &[&[1, 0]], &[&[0, 1]]),
            (CodeKind::Binary, CodeRate::R2_3) => (4, &[&[1, 0, 0, 0]], &[&[0, 0, 1, 0]]),
            (CodeKind::Binary, CodeRate::R3_4) => {
                (6, &[&[1, 0, 0, 0, 0, 0]], &[&[0, 0, 0, 1, 0, 0]])
            }
            (CodeKind::DuoBinary, CodeRate::R1_3) => (1, &[&[1], &[1]], &[&[1], &[1]]),
            (CodeKind::DuoBinary, CodeRate::R1_2) => (1, &[&[1], &[0]], &[&[1], &[0]]),
            (CodeKind::DuoBinary, CodeRate::R2_3) => (2, &[&[1, 0], &[0, 0]], &[&[0, 1], &[0, 0]]),
            (CodeKind::DuoBinary, CodeRate::R3_4) => {
                (3, &[&[1, 0, 0], &[0, 0, 0]], &[&[0, 1, 0], &[0, 0, 0]])
            }
        };
        Self::from_masks(kind.bits_per_step(), period, enc1, enc2)
            .expect("static puncturing masks are consistent")
    }

    /// Builds a pattern from per-parity-stream masks of length `period`.
    pub fn from_masks(
        bits_per_step: usize,
        period: usize,
        enc1: &[&[u8]],
        enc2: &[&[u8]],
    ) -> Result<Self> {
        let pp = enc1.len();
        if period == 0 || pp == 0 || enc2.len() != pp {
            return Err(invalid!("puncturing masks must be non-empty and match in stream count"));
        }
        if enc1.iter().chain(enc2.iter()).any(|m| m.len() != period) {
            return Err(invalid!("every puncturing mask must have length {period}"));
        }
        let mut keep = vec![false; period * 2 * pp];
        for step in 0..period {
            for j in 0..pp {
                keep[(step * 2) * pp + j] = enc1[j][step] != 0;
                keep[(step * 2 + 1) * pp + j] = enc2[j][step] != 0;
            }
        }
        let data = period * bits_per_step;
        let coded = data + keep.iter().filter(|&&k| k).count();
        let g = gcd(data, coded);
        Ok(Self {
            period,
            bits_per_step,
            parity_per_step: pp,
            keep,
            rate: (data / g, coded / g),
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Achieved rate over whole periods, tail excluded.
    pub fn rate(&self) -> (usize, usize) {
        self.rate
    }

    #[inline]
    pub fn keeps(&self, step: usize, encoder: usize, parity: usize) -> bool {
        self.keep[((step % self.period) * 2 + encoder) * self.parity_per_step + parity]
    }

    /// Number of transmitted values for `steps` trellis steps plus
    /// `tail_len` tail values per encoder.
    pub fn transmitted_len(&self, steps: usize, tail_len: usize) -> usize {
        let kept_per_period = self.keep.iter().filter(|&&k| k).count();
        steps * self.bits_per_step + (steps / self.period) * kept_per_period + 2 * tail_len
    }

    fn check_steps(&self, steps: usize) -> Result<()> {
        if steps % self.period != 0 {
            return Err(invalid!(
                "{steps} trellis steps are not a whole number of puncturing periods ({})",
                self.period
            ));
        }
        Ok(())
    }

    fn check_streams<T>(&self, s: &CodeStreams<T>) -> Result<usize> {
        if s.systematic.len() % self.bits_per_step != 0 {
            return Err(invalid!("systematic stream is not whole steps"));
        }
        let steps = s.systematic.len() / self.bits_per_step;
        self.check_steps(steps)?;
        let npar = steps * self.parity_per_step;
        if s.parity1.len() != npar || s.parity2.len() != npar {
            return Err(invalid!(
                "parity streams of length {}/{} do not match {steps} steps",
                s.parity1.len(),
                s.parity2.len()
            ));
        }
        if s.tail1.len() != s.tail2.len() {
            return Err(invalid!("tail lengths differ between encoders"));
        }
        Ok(steps)
    }

    /// Serializes the kept values for transmission.
    pub fn puncture<T: Copy>(&self, streams: &CodeStreams<T>) -> Result<Vec<T>> {
        let steps = self.check_streams(streams)?;
        let pp = self.parity_per_step;
        let bps = self.bits_per_step;
        let mut out = Vec::with_capacity(self.transmitted_len(steps, streams.tail1.len()));
        for k in 0..steps {
            out.extend_from_slice(&streams.systematic[k * bps..(k + 1) * bps]);
            for (enc, par) in [&streams.parity1, &streams.parity2].into_iter().enumerate() {
                for j in 0..pp {
                    if self.keeps(k, enc, j) {
                        out.push(par[k * pp + j]);
                    }
                }
            }
        }
        out.extend_from_slice(&streams.tail1);
        out.extend_from_slice(&streams.tail2);
        Ok(out)
    }

    /// Inverse of [`puncture`](Self::puncture) on LLRs; punctured positions
    /// get LLR 0.
    pub fn depuncture(
        &self,
        received: &[f64],
        steps: usize,
        tail_len: usize,
    ) -> Result<CodeStreams<f64>> {
        self.check_steps(steps)?;
        let expected = self.transmitted_len(steps, tail_len);
        if received.len() != expected {
            return Err(invalid!(
                "received {} values, pattern expects {expected}",
                received.len()
            ));
        }
        let pp = self.parity_per_step;
        let bps = self.bits_per_step;
        let mut out = CodeStreams {
            systematic: Vec::with_capacity(steps * bps),
            parity1: vec![0.0; steps * pp],
            parity2: vec![0.0; steps * pp],
            tail1: Vec::new(),
            tail2: Vec::new(),
        };
        let mut it = received.iter().copied();
        for k in 0..steps {
            out.systematic.extend(it.by_ref().take(bps));
            for enc in 0..2 {
                for j in 0..pp {
                    if self.keeps(k, enc, j) {
                        let v = it.next().unwrap_or(0.0);
                        if enc == 0 {
                            out.parity1[k * pp + j] = v;
                        } else {
                            out.parity2[k * pp + j] = v;
                        }
                    }
                }
            }
        }
        out.tail1.extend(it.by_ref().take(tail_len));
        out.tail2.extend(it.by_ref().take(tail_len));
        Ok(out)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

//! Parallel concatenated codes and their iterative decoder.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::llr::{clamp_llr, LlrRole, SymbolLlrBlock};
use crate::permute::{CodeStreams, PuncturePattern, TurboInterleaver};
use crate::siso::{Boundary, OpCounters, SisoAlgorithm, SisoDecoder, SisoInput};
use crate::trellis::{CodeKind, Termination, TrellisSpec};

pub use crate::permute::puncture::CodeRate;

/// Iterative decoding parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurboConfig {
    /// Full iterations; each runs both constituent decoders once.
    pub iterations: usize,
    pub algorithm: SisoAlgorithm,
    /// Factor applied to extrinsic values before they become a-priori input.
    pub extrinsic_scale: f64,
    /// Stop once both decoders agree on every hard decision.
    pub early_stop: bool,
    /// Keep the a-posteriori LLRs of every iteration in the output.
    pub keep_history: bool,
}

impl Default for TurboConfig {
    fn default() -> Self {
        Self {
            iterations: 8,
            algorithm: SisoAlgorithm::MaxLogMap,
            extrinsic_scale: 1.0,
            early_stop: false,
            keep_history: false,
        }
    }
}

/// Result of decoding one block.
#[derive(Debug, Clone, PartialEq)]
pub struct TurboOutput {
    /// Decoded data bits.
    pub bits: Vec<u8>,
    /// Iterations actually run.
    pub iterations: usize,
    /// Final a-posteriori symbol LLRs in natural order.
    pub aposteriori: SymbolLlrBlock,
    /// A-posteriori LLRs after each iteration when history is kept.
    pub history: Vec<SymbolLlrBlock>,
    /// Operations of all constituent decoder passes.
    pub counters: OpCounters,
}

/// A turbo code of fixed block size and rate.
#[derive(Debug, Clone)]
pub struct TurboCode {
    trellis: TrellisSpec,
    interleaver: TurboInterleaver,
    puncture: PuncturePattern,
    rate: CodeRate,
    data_bits: usize,
}

impl TurboCode {
    /// The standard code of `kind` carrying `data_bits` bits per block.
    pub fn new(kind: CodeKind, data_bits: usize, rate: CodeRate) -> Result<Self> {
        let trellis = match kind {
            CodeKind::Binary => TrellisSpec::binary_rsc(),
            CodeKind::DuoBinary => TrellisSpec::duobinary_rsc(),
        };
        let interleaver = TurboInterleaver::for_code(kind, data_bits)?;
        let steps = interleaver.steps();
        if kind.native_termination() == Termination::Tailbiting {
            trellis.circulation_residue(steps)?;
        }
        let puncture = PuncturePattern::for_rate(kind, rate);
        if steps % puncture.period() != 0 {
            return Err(invalid!(
                "{steps} trellis steps do not fill whole puncturing periods of {}",
                puncture.period()
            ));
        }
        Ok(Self {
            trellis,
            interleaver,
            puncture,
            rate,
            data_bits,
        })
    }

    pub fn kind(&self) -> CodeKind {
        self.trellis.kind()
    }

    pub fn trellis(&self) -> &TrellisSpec {
        &self.trellis
    }

    pub fn interleaver(&self) -> &TurboInterleaver {
        &self.interleaver
    }

    pub fn puncture(&self) -> &PuncturePattern {
        &self.puncture
    }

    pub fn rate(&self) -> CodeRate {
        self.rate
    }

    pub fn data_bits(&self) -> usize {
        self.data_bits
    }

    /// Trellis steps per block.
    pub fn steps(&self) -> usize {
        self.interleaver.steps()
    }

    pub fn termination(&self) -> Termination {
        self.kind().native_termination()
    }

    pub fn boundary(&self) -> Boundary {
        self.termination().into()
    }

    /// Tail values per constituent encoder.
    pub fn tail_len(&self) -> usize {
        match self.termination() {
            Termination::TailBits => {
                self.trellis.tail_steps()
                    * (self.trellis.bits_per_step() + self.trellis.parity_per_step())
            }
            Termination::Tailbiting => 0,
        }
    }

    /// Transmitted bits per block.
    pub fn encoded_len(&self) -> usize {
        self.puncture.transmitted_len(self.steps(), self.tail_len())
    }

    /// Runs both constituent encoders.
    pub fn encode_streams(&self, data: &[u8]) -> Result<CodeStreams<u8>> {
        if data.len() != self.data_bits {
            return Err(invalid!("expected {} data bits, got {}", self.data_bits, data.len()));
        }
        if let Some(b) = data.iter().find(|&&b| b > 1) {
            return Err(invalid!("data contains the non-binary value {b}"));
        }
        let interleaved = self.interleaver.interleave_bits(data)?;
        let enc1 = self.constituent(data)?;
        let enc2 = self.constituent(&interleaved)?;
        let steps = self.steps();
        let flat = |p: &[Vec<u8>]| -> Vec<u8> {
            (0..steps).flat_map(|k| p.iter().map(move |s| s[k])).collect()
        };
        Ok(CodeStreams {
            systematic: data.to_vec(),
            parity1: flat(&enc1.parity),
            parity2: flat(&enc2.parity),
            tail1: enc1.tail,
            tail2: enc2.tail,
        })
    }

    fn constituent(&self, data: &[u8]) -> Result<crate::trellis::EncodedStreams> {
        let t = self.termination();
        let start = match t {
            Termination::TailBits => 0,
            Termination::Tailbiting => self.trellis.circulation_state(data)?,
        };
        self.trellis.encode(data, t, start)
    }

    /// Encodes and punctures one block.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<u8>> {
        self.puncture.puncture(&self.encode_streams(data)?)
    }

    /// Decodes received bit LLRs (`ln P(1)/P(0)`, transmission order).
    pub fn decode(&self, llrs: &[f64], config: &TurboConfig) -> Result<TurboOutput> {
        TurboDecoder::new(self, config).decode(llrs)
    }
}

/// Reusable iterative decoder bound to one code.
#[derive(Debug, Clone)]
pub struct TurboDecoder<'c> {
    code: &'c TurboCode,
    config: TurboConfig,
    siso1: SisoDecoder,
    siso2: SisoDecoder,
}

impl<'c> TurboDecoder<'c> {
    pub fn new(code: &'c TurboCode, config: &TurboConfig) -> Self {
        Self {
            code,
            config: *config,
            siso1: SisoDecoder::new(&code.trellis, config.algorithm),
            siso2: SisoDecoder::new(&code.trellis, config.algorithm),
        }
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<TurboOutput> {
        let code = self.code;
        if self.config.iterations == 0 {
            return Err(invalid!("at least one iteration is required"));
        }
        let streams = code
            .puncture
            .depuncture(llrs, code.steps(), code.tail_len())?;
        self.decode_streams(&streams)
    }

    /// Decodes already depunctured channel LLRs.
    pub fn decode_streams(&mut self, ch: &CodeStreams<f64>) -> Result<TurboOutput> {
        let code = self.code;
        let t = &code.trellis;
        let steps = code.steps();
        let m = t.arity();
        let bps = t.bits_per_step();
        let boundary = code.boundary();
        let scale = self.config.extrinsic_scale;
        self.siso1.reset_counters();
        self.siso2.reset_counters();
        // The extrinsic subtraction must see the same clamped values as the SISOs.
        let clamp = |v: &[f64]| v.iter().map(|&x| clamp_llr(x)).collect::<Vec<_>>();
        let ch = &CodeStreams {
            systematic: clamp(&ch.systematic),
            parity1: clamp(&ch.parity1),
            parity2: clamp(&ch.parity2),
            tail1: clamp(&ch.tail1),
            tail2: clamp(&ch.tail2),
        };

        let sys2 = code.interleaver.interleave_bits(&ch.systematic)?;
        let n_sym = steps * (m - 1);
        let mut la1 = vec![0.0; n_sym];
        let mut la2 = vec![0.0; n_sym];
        let mut l1 = vec![0.0; n_sym];
        let mut l2 = vec![0.0; n_sym];
        let mut le = vec![0.0; n_sym];
        let mut post = vec![0.0; n_sym];
        let mut history = Vec::new();
        let mut done = 0;
        for _ in 0..self.config.iterations {
            let in1 = SisoInput {
                systematic: &ch.systematic,
                parity: &ch.parity1,
                apriori: &la1,
                tail: &ch.tail1,
            };
            self.siso1.decode_into(t, &in1, boundary, &mut l1)?;
            extrinsic_extract(&l1, &ch.systematic, &la1, m, &mut le)?;
            le.iter_mut().for_each(|x| *x = clamp_llr(*x * scale));
            code.interleaver.interleave_symbols(&le, &mut la2)?;

            let in2 = SisoInput {
                systematic: &sys2,
                parity: &ch.parity2,
                apriori: &la2,
                tail: &ch.tail2,
            };
            self.siso2.decode_into(t, &in2, boundary, &mut l2)?;
            extrinsic_extract(&l2, &sys2, &la2, m, &mut le)?;
            le.iter_mut().for_each(|x| *x = clamp_llr(*x * scale));
            code.interleaver.deinterleave_symbols(&le, &mut la1)?;
            code.interleaver.deinterleave_symbols(&l2, &mut post)?;
            done += 1;
            if self.config.keep_history {
                history.push(SymbolLlrBlock::from_values(LlrRole::Aposteriori, m, post.clone())?);
            }
            if self.config.early_stop && hard(&l1, m) == hard(&post, m) {
                break;
            }
        }
        let aposteriori = SymbolLlrBlock::from_values(LlrRole::Aposteriori, m, post)?;
        let bits = aposteriori
            .hard_symbols()
            .into_iter()
            .flat_map(|u| (0..bps).map(move |i| t.input_bit(u, i) as u8))
            .collect();
        Ok(TurboOutput {
            bits,
            iterations: done,
            aposteriori,
            history,
            counters: self.siso1.counters() + self.siso2.counters(),
        })
    }
}

fn hard(llrs: &[f64], m: usize) -> Vec<usize> {
    llrs.chunks_exact(m - 1)
        .map(|c| {
            let mut best = 0;
            let mut val = 0.0;
            for (i, &x) in c.iter().enumerate() {
                if x > val {
                    best = i + 1;
                    val = x;
                }
            }
            best
        })
        .collect()
}

/// Extrinsic part of a-posteriori symbol LLRs:
/// `Le(v) = L(v) - Ls(v) - La(v)`, where `Ls(v)` sums the systematic bit LLRs
/// of the bits set in `v` (most significant bit first).
pub fn extrinsic_extract(
    aposteriori: &[f64],
    systematic: &[f64],
    apriori: &[f64],
    arity: usize,
    out: &mut [f64],
) -> Result<()> {
    if !arity.is_power_of_two() || arity < 2 {
        return Err(invalid!("arity {arity} is not a power of two"));
    }
    let bps = arity.trailing_zeros() as usize;
    let steps = systematic.len() / bps;
    let n = steps * (arity - 1);
    if systematic.len() % bps != 0
        || aposteriori.len() != n
        || apriori.len() != n
        || out.len() != n
    {
        return Err(invalid!("extrinsic buffers do not describe the same block"));
    }
    for k in 0..steps {
        let sys = &systematic[k * bps..(k + 1) * bps];
        for v in 1..arity {
            let mut ls = 0.0;
            for (i, &l) in sys.iter().enumerate() {
                if v >> (bps - 1 - i) & 1 == 1 {
                    ls += l;
                }
            }
            let idx = k * (arity - 1) + v - 1;
            out[idx] = aposteriori[idx] - ls - apriori[idx];
        }
    }
    Ok(())
}

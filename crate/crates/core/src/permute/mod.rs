//! Interleavers and rate adaptation.
//!
//! - [`qpp`]: quadratic permutation polynomial interleaver (binary code).
//! - [`couple`]: two-step couple interleaver (duo-binary code).
//! - [`puncture`]: parity puncturing and LLR depuncturing.
//! - [`channel`]: seeded pseudo-random bit interleaver ahead of the mapper.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::trellis::CodeKind;

pub mod channel;
pub mod couple;
pub mod puncture;
pub mod qpp;

pub use channel::ChannelInterleaver;
pub use couple::CoupleInterleaver;
pub use puncture::{CodeRate, CodeStreams, PuncturePattern};
pub use qpp::QppInterleaver;

/// A permutation stored as `out[i] = in[source(i)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    source: Vec<usize>,
    target: Vec<usize>,
}

impl Permutation {
    /// Fails if `source` is not a bijection on `0..source.len()`.
    pub fn new(source: Vec<usize>) -> Result<Self> {
        let n = source.len();
        let mut target = vec![usize::MAX; n];
        for (i, &s) in source.iter().enumerate() {
            if s >= n || target[s] != usize::MAX {
                return Err(invalid!("not a permutation: index {s} at position {i}"));
            }
            target[s] = i;
        }
        Ok(Self { source, target })
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    #[inline]
    pub fn source(&self, i: usize) -> usize {
        self.source[i]
    }

    /// Output position that input `j` is moved to.
    #[inline]
    pub fn target(&self, j: usize) -> usize {
        self.target[j]
    }

    pub fn sources(&self) -> &[usize] {
        &self.source
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(invalid!(
                "sequence of length {len} given to a permutation of length {}",
                self.len()
            ));
        }
        Ok(())
    }

    pub fn apply<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.check_len(data.len())?;
        Ok(self.source.iter().map(|&s| data[s]).collect())
    }

    pub fn invert<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.check_len(data.len())?;
        Ok(self.target.iter().map(|&t| data[t]).collect())
    }
}

/// The inner interleaver between the two constituent encoders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TurboInterleaver {
    Qpp(QppInterleaver),
    Couple(CoupleInterleaver),
}

impl TurboInterleaver {
    /// Standard interleaver for `data_bits` bits of the given code.
    pub fn for_code(kind: CodeKind, data_bits: usize) -> Result<Self> {
        match kind {
            CodeKind::Binary => QppInterleaver::new(data_bits).map(Self::Qpp),
            CodeKind::DuoBinary => {
                if data_bits % 2 != 0 {
                    return Err(invalid!("duo-binary block of {data_bits} bits is not whole couples"));
                }
                CoupleInterleaver::new(data_bits / 2).map(Self::Couple)
            }
        }
    }

    /// Trellis steps covered.
    pub fn steps(&self) -> usize {
        match self {
            Self::Qpp(q) => q.len(),
            Self::Couple(c) => c.len(),
        }
    }

    /// Interleaves data bits (couples packed `A, B`).
    pub fn interleave_bits<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        match self {
            Self::Qpp(q) => q.interleave(data),
            Self::Couple(c) => c.interleave_pairs(data),
        }
    }

    pub fn deinterleave_bits<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        match self {
            Self::Qpp(q) => q.deinterleave(data),
            Self::Couple(c) => c.deinterleave_pairs(data),
        }
    }

    /// Interleaves per-step symbol LLRs (`arity - 1` values per step).
    pub fn interleave_symbols(&self, llrs: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Self::Qpp(q) => {
                if llrs.len() != q.len() || out.len() != q.len() {
                    return Err(invalid!("symbol LLR length mismatch"));
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o = llrs[q.index(i)];
                }
                Ok(())
            }
            Self::Couple(c) => c.interleave_symbol_llrs(llrs, out),
        }
    }

    pub fn deinterleave_symbols(&self, llrs: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Self::Qpp(q) => {
                if llrs.len() != q.len() || out.len() != q.len() {
                    return Err(invalid!("symbol LLR length mismatch"));
                }
                for (i, &l) in llrs.iter().enumerate() {
                    out[q.index(i)] = l;
                }
                Ok(())
            }
            Self::Couple(c) => c.deinterleave_symbol_llrs(llrs, out),
        }
    }
}

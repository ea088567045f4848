//! Log-likelihood ratio containers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Magnitude limit applied to every LLR entering a constituent decoder.
pub const LLR_CLAMP: f64 = 64.0;

/// Clamps to `±LLR_CLAMP`; NaN becomes 0 (no information).
#[inline]
pub fn clamp_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// What an [`LlrBlock`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LlrRole {
    /// Channel values of the systematic bits, `L_C * y_I`.
    Systematic,
    /// Channel values of parity bits, `L_C * y_P`.
    Parity,
    /// Channel values of tail symbols.
    Tail,
    /// `L(u)`
    Apriori,
    /// `L_e(û)`
    Extrinsic,
    /// `L(û)`
    Aposteriori,
}

/// A vector of bit LLRs, `ln P(1) / P(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrBlock {
    pub role: LlrRole,
    pub values: Vec<f64>,
}

impl LlrBlock {
    pub fn new(role: LlrRole, values: Vec<f64>) -> Self {
        Self { role, values }
    }

    pub fn zeros(role: LlrRole, len: usize) -> Self {
        Self::new(role, vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Hard decisions: 1 where the LLR is positive.
    pub fn hard_bits(&self) -> Vec<u8> {
        self.values.iter().map(|&l| u8::from(l > 0.0)).collect()
    }
}

/// Per-step symbol LLRs `ln P(v) / P(0)` for `v = 1..arity`.
///
/// The reference value `v = 0` is not stored; its LLR is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolLlrBlock {
    pub role: LlrRole,
    arity: usize,
    values: Vec<f64>,
}

impl SymbolLlrBlock {
    pub fn zeros(role: LlrRole, arity: usize, steps: usize) -> Self {
        Self {
            role,
            arity,
            values: vec![0.0; (arity - 1) * steps],
        }
    }

    pub fn from_values(role: LlrRole, arity: usize, values: Vec<f64>) -> Result<Self> {
        if arity < 2 || values.len() % (arity - 1) != 0 {
            return Err(invalid!(
                "{} values do not form whole steps of arity {arity}",
                values.len()
            ));
        }
        Ok(Self {
            role,
            arity,
            values,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn steps(&self) -> usize {
        self.values.len() / (self.arity - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// LLR of symbol `v` at `step` relative to symbol 0.
    #[inline]
    pub fn get(&self, step: usize, v: usize) -> f64 {
        if v == 0 {
            0.0
        } else {
            self.values[step * (self.arity - 1) + v - 1]
        }
    }

    /// Most likely symbol at each step.
    pub fn hard_symbols(&self) -> Vec<usize> {
        self.values
            .chunks_exact(self.arity - 1)
            .map(|c| {
                let mut best = 0;
                let mut best_val = 0.0;
                for (i, &x) in c.iter().enumerate() {
                    if x > best_val {
                        best_val = x;
                        best = i + 1;
                    }
                }
                best
            })
            .collect()
    }

    /// Max-log marginal bit LLRs, `bits_per_step` per step in stream order:
    /// `L(bit) = max over symbols with bit = 1 - max over symbols with bit = 0`.
    pub fn bit_llrs(&self) -> Vec<f64> {
        let bits = self.arity.trailing_zeros() as usize;
        let mut out = Vec::with_capacity(self.steps() * bits);
        for step in 0..self.steps() {
            for pos in 0..bits {
                let shift = bits - 1 - pos;
                let mut one = f64::NEG_INFINITY;
                let mut zero = f64::NEG_INFINITY;
                for v in 0..self.arity {
                    let l = self.get(step, v);
                    if v >> shift & 1 == 1 {
                        one = one.max(l);
                    } else {
                        zero = zero.max(l);
                    }
                }
                out.push(one - zero);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_bounds_and_nan() {
        assert_eq!(clamp_llr(100.0), LLR_CLAMP);
        assert_eq!(clamp_llr(-1e300), -LLR_CLAMP);
        assert_eq!(clamp_llr(f64::NAN), 0.0);
        assert_eq!(clamp_llr(3.5), 3.5);
    }

    #[test]
    fn symbol_hard_decisions_and_bit_marginals() {
        // step 0: couple 10 most likely, step 1: couple 00
        let b = SymbolLlrBlock::from_values(
            LlrRole::Aposteriori,
            4,
            vec![-1.0, 2.0, 0.5, -3.0, -2.0, -4.0],
        )
        .unwrap();
        assert_eq!(b.steps(), 2);
        assert_eq!(b.hard_symbols(), vec![2, 0]);
        let bits = b.bit_llrs();
        // A: max(L10, L11) - max(0, L01) = 2 - 0
        assert_eq!(bits[0], 2.0);
        // B: max(L01, L11) - max(0, L10) = 0.5 - 2
        assert_eq!(bits[1], -1.5);
        assert_eq!(bits[2], -2.0);
        assert_eq!(bits[3], -3.0);
    }

    #[test]
    fn ragged_symbol_block_rejected() {
        assert!(SymbolLlrBlock::from_values(LlrRole::Apriori, 4, vec![0.0; 4]).is_err());
    }
}

//! Two-step couple interleaver of the duo-binary turbo code.
//!
//! Step 1 swaps `A` and `B` inside every couple at an odd index. Step 2 reads
//! the swapped sequence at
//!
//! ```text
//! j mod 4 == 0:  P(j) = (P0*j + 1)             mod N
//! j mod 4 == 1:  P(j) = (P0*j + 1 + N/2 + P1)  mod N
//! j mod 4 == 2:  P(j) = (P0*j + 1 + P2)        mod N
//! j mod 4 == 3:  P(j) = (P0*j + 1 + N/2 + P3)  mod N
//! ```
//!
//! so interleaved couple `j` is couple `P(j)` of the input, swapped when
//! `P(j)` is odd.

use alloc::vec::Vec;

use super::Permutation;
use crate::error::{invalid, unsupported, Result};

/// `(N couples, P0, P1, P2, P3)` of the 802.16 convolutional turbo code.
const COUPLE_TABLE: [(u16, u16, u16, u16, u16); 17] = [
    (24, 5, 0, 0, 0),
    (36, 11, 18, 0, 18),
    (48, 13, 24, 0, 24),
    (72, 11, 6, 0, 6),
    (96, 7, 48, 24, 72),
    (108, 11, 54, 56, 2),
    (120, 13, 60, 0, 60),
    (144, 17, 74, 72, 2),
    (180, 11, 90, 0, 90),
    (192, 11, 96, 48, 144),
    (216, 13, 108, 0, 108),
    (240, 13, 120, 60, 180),
    (480, 53, 62, 12, 2),
    (960, 43, 64, 300, 824),
    (1440, 43, 720, 360, 540),
    (1920, 31, 8, 24, 16),
    (2400, 53, 66, 24, 2),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupleInterleaver {
    n: usize,
    params: [usize; 4],
    perm: Permutation,
}

impl CoupleInterleaver {
    /// Interleaver for `n` couples with the standard parameters.
    pub fn new(n: usize) -> Result<Self> {
        let &(_, p0, p1, p2, p3) = COUPLE_TABLE
            .iter()
            .find(|e| usize::from(e.0) == n)
            .ok_or_else(|| unsupported!("no couple interleaver for {n} couples"))?;
        Self::with_params(n, [p0, p1, p2, p3].map(usize::from))
    }

    pub fn with_params(n: usize, params: [usize; 4]) -> Result<Self> {
        if n == 0 || n % 4 != 0 {
            return Err(invalid!("couple interleaver needs a positive multiple of 4 couples, got {n}"));
        }
        let [p0, p1, p2, p3] = params;
        let half = n / 2;
        let map = (0..n)
            .map(|j| {
                let offset = match j % 4 {
                    0 => 0,
                    1 => half + p1,
                    2 => p2,
                    _ => half + p3,
                };
                (p0 * j + 1 + offset) % n
            })
            .collect();
        let perm = Permutation::new(map)
            .map_err(|_| invalid!("couple parameters {params:?} do not permute {n} couples"))?;
        Ok(Self { n, params, perm })
    }

    /// Number of couples.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn params(&self) -> [usize; 4] {
        self.params
    }

    /// Source couple of interleaved position `j`.
    #[inline]
    pub fn source(&self, j: usize) -> usize {
        self.perm.source(j)
    }

    /// Whether interleaved position `j` carries a swapped couple.
    #[inline]
    pub fn swapped(&self, j: usize) -> bool {
        self.source(j) % 2 == 1
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    /// Interleaves `2N` items laid out `A0, B0, A1, B1, ...`.
    pub fn interleave_pairs<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.check(data.len(), 2)?;
        let mut out = Vec::with_capacity(data.len());
        for j in 0..self.n {
            let s = self.source(j);
            let (a, b) = (data[2 * s], data[2 * s + 1]);
            if self.swapped(j) {
                out.extend([b, a]);
            } else {
                out.extend([a, b]);
            }
        }
        Ok(out)
    }

    pub fn deinterleave_pairs<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.check(data.len(), 2)?;
        let mut out = data.to_vec();
        for j in 0..self.n {
            let s = self.source(j);
            let (a, b) = (data[2 * j], data[2 * j + 1]);
            if self.swapped(j) {
                out[2 * s] = b;
                out[2 * s + 1] = a;
            } else {
                out[2 * s] = a;
                out[2 * s + 1] = b;
            }
        }
        Ok(out)
    }

    /// Interleaves couple LLRs `[L01, L10, L11]` per couple. A swap exchanges
    /// the `01` and `10` entries.
    pub fn interleave_symbol_llrs(&self, llrs: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(llrs.len(), 3)?;
        self.check(out.len(), 3)?;
        for j in 0..self.n {
            let s = self.source(j);
            let src = &llrs[3 * s..3 * s + 3];
            let dst = &mut out[3 * j..3 * j + 3];
            if self.swapped(j) {
                dst.copy_from_slice(&[src[1], src[0], src[2]]);
            } else {
                dst.copy_from_slice(src);
            }
        }
        Ok(())
    }

    pub fn deinterleave_symbol_llrs(&self, llrs: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(llrs.len(), 3)?;
        self.check(out.len(), 3)?;
        for j in 0..self.n {
            let s = self.source(j);
            let src = &llrs[3 * j..3 * j + 3];
            let dst = &mut out[3 * s..3 * s + 3];
            if self.swapped(j) {
                dst.copy_from_slice(&[src[1], src[0], src[2]]);
            } else {
                dst.copy_from_slice(src);
            }
        }
        Ok(())
    }

    fn check(&self, len: usize, per_couple: usize) -> Result<()> {
        if len != per_couple * self.n {
            return Err(invalid!(
                "expected {} values for {} couples, got {len}",
                per_couple * self.n,
                self.n
            ));
        }
        Ok(())
    }
}

/// Couple counts with interleaver parameters.
pub fn supported_sizes() -> impl Iterator<Item = usize> {
    COUPLE_TABLE.iter().map(|e| usize::from(e.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn all_table_entries_are_bijections() {
        for n in supported_sizes() {
            CoupleInterleaver::new(n).unwrap();
        }
        assert!(CoupleInterleaver::new(25).is_err());
        assert!(CoupleInterleaver::new(100).is_err());
    }

    #[test]
    fn swap_follows_source_parity() {
        let c = CoupleInterleaver::new(24).unwrap();
        let data: Vec<(usize, char)> = (0..24).flat_map(|i| [(i, 'a'), (i, 'b')]).collect();
        let out = c.interleave_pairs(&data).unwrap();
        for j in 0..24 {
            let src = c.source(j);
            assert_eq!(out[2 * j].0, src);
            let expect = if src % 2 == 1 { ['b', 'a'] } else { ['a', 'b'] };
            assert_eq!([out[2 * j].1, out[2 * j + 1].1], expect);
        }
    }

    #[test]
    fn symbol_llrs_follow_pair_interleaving() {
        let c = CoupleInterleaver::new(36).unwrap();
        let llrs: Vec<f64> = (0..108).map(|i| i as f64).collect();
        let mut out = vec![0.0; 108];
        c.interleave_symbol_llrs(&llrs, &mut out).unwrap();
        let mut back = vec![0.0; 108];
        c.deinterleave_symbol_llrs(&out, &mut back).unwrap();
        assert_eq!(back, llrs);
        for j in 0..36 {
            let s = c.source(j);
            if c.swapped(j) {
                assert_eq!(out[3 * j], llrs[3 * s + 1]);
                assert_eq!(out[3 * j + 1], llrs[3 * s]);
            } else {
                assert_eq!(out[3 * j], llrs[3 * s]);
            }
            assert_eq!(out[3 * j + 2], llrs[3 * s + 2]);
        }
    }
}

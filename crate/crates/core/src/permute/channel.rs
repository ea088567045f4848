//! Seeded pseudo-random bit interleaver between the encoder and the mapper.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Permutation;
use crate::error::Result;

/// Fisher-Yates permutation drawn from ChaCha8 seeded with `seed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelInterleaver {
    seed: u64,
    perm: Permutation,
}

impl ChannelInterleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut map: Vec<usize> = (0..len).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        map.shuffle(&mut rng);
        let perm = Permutation::new(map).expect("a shuffle is a permutation");
        Self { seed, perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.perm.apply(data)
    }

    pub fn deinterleave<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.perm.invert(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn reproducible_for_fixed_seed() {
        let a = ChannelInterleaver::new(600, 7);
        let b = ChannelInterleaver::new(600, 7);
        let c = ChannelInterleaver::new(600, 8);
        assert_eq!(a, b);
        assert_ne!(a.permutation(), c.permutation());
    }

    #[test]
    fn bursts_are_dispersed() {
        // A burst of 16 adjacent channel positions must land in at least 8
        // distinct aligned 16-bit windows of the deinterleaved block.
        for len in [512, 588, 1024, 1536] {
            let ci = ChannelInterleaver::new(len, 0x5eed);
            for start in 0..=len - 16 {
                let windows: BTreeSet<usize> = (start..start + 16)
                    .map(|i| ci.permutation().source(i) / 16)
                    .collect();
                assert!(windows.len() >= 8, "len {len} burst at {start}: {}", windows.len());
            }
        }
    }
}

//! Turbo codes for OFDM links: the binary tail-terminated code with a QPP
//! interleaver, the duo-binary tailbiting code with the two-step couple
//! interleaver, and iterative decoding with Max-Log-MAP or SOVA constituent
//! decoders.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! # Conventions
//!
//! - Bits are `u8` values `0`/`1`.
//! - A bit LLR is `ln P(b = 1) / P(b = 0)`: positive means logical one.
//! - A symbol LLR for a trellis input `v` is `ln P(v) / P(0)`. For the binary
//!   code this is the bit LLR; for the duo-binary code the three values per
//!   couple are ordered `01, 10, 11` where the couple `AB` has value `2A + B`.
//! - Trellis states pack the shift register as `4*s1 + 2*s2 + s3`, `s1` being
//!   the most recent feedback value.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

mod error;
pub mod llr;
pub mod permute;
pub mod siso;
pub mod trellis;
pub mod turbo;

pub use error::{Error, Result};
pub use llr::{LlrBlock, LlrRole, SymbolLlrBlock, LLR_CLAMP};
pub use siso::{Boundary, OpCounters, SisoAlgorithm, SisoInput};
pub use trellis::{CodeKind, GeneratorSet, Termination, TrellisSpec};
pub use turbo::{CodeRate, TurboCode, TurboConfig, TurboOutput};

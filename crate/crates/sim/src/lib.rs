//! OFDM link over tapped-delay-line fading and a Monte Carlo BLER harness
//! for the `turbofec` decoders.

pub mod channel;
pub mod error;
pub mod harness;
pub mod modem;

pub use error::{SimError, SimResult};
pub use harness::{
    report_ops, run_bler_point, run_sweep, snr_at_bler, Algorithm, BlerPoint, ChannelKind, Code,
    Link, Rate, SimConfig,
};
pub use modem::{Modulation, OfdmConfig};

//! Monte Carlo BLER engine.
//!
//! Every block draws its data, fading and noise from a ChaCha stream selected
//! by the block index under the master seed, independently of the SNR. A
//! block is therefore reproducible in isolation, and curves for different
//! algorithms or SNRs see the same channel realizations. Blocks run in
//! fixed-size batches and the stopping rule is checked between batches, so
//! results do not depend on the number of workers.

use std::fs::File;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use turbofec::permute::ChannelInterleaver;
use turbofec::siso::{SisoDecoder, DEFAULT_UPDATE_DEPTH};
use turbofec::turbo::TurboDecoder;
use turbofec::{CodeKind, CodeRate, OpCounters, SisoAlgorithm, SisoInput, TurboCode, TurboConfig};

use crate::channel::{
    apply_channel, build_profile, frequency_response, generate_block_fading, noise_variance,
    ChannelRealization, ProfileName, TdlProfile,
};
use crate::error::{SimError, SimResult};
use crate::modem::{demap_block, map_symbols, zf_equalize, Modulation, Ofdm, OfdmConfig};

/// Seed of the channel interleaver; the permutation depends only on length.
pub const CHANNEL_INTERLEAVER_SEED: u64 = 0x5eed;

/// Blocks simulated between two checks of the stopping rule.
pub const BATCH: u64 = 50;

/// Noise variance handed to the demapper when noise is disabled.
const NOISELESS_DEMAP_VAR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
pub enum Code {
    #[serde(rename = "binary")]
    Binary,
    #[serde(rename = "duo-binary")]
    #[value(name = "duo-binary")]
    DuoBinary,
}

impl Code {
    pub fn kind(self) -> CodeKind {
        match self {
            Code::Binary => CodeKind::Binary,
            Code::DuoBinary => CodeKind::DuoBinary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
pub enum Rate {
    #[serde(rename = "1/3")]
    #[value(name = "1/3")]
    R1_3,
    #[serde(rename = "1/2")]
    #[value(name = "1/2")]
    R1_2,
    #[serde(rename = "2/3")]
    #[value(name = "2/3")]
    R2_3,
    #[serde(rename = "3/4")]
    #[value(name = "3/4")]
    R3_4,
}

impl Rate {
    pub fn code_rate(self) -> CodeRate {
        match self {
            Rate::R1_3 => CodeRate::R1_3,
            Rate::R1_2 => CodeRate::R1_2,
            Rate::R2_3 => CodeRate::R2_3,
            Rate::R3_4 => CodeRate::R3_4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
pub enum Algorithm {
    #[serde(rename = "max-log-map")]
    #[value(name = "max-log-map")]
    MaxLogMap,
    #[serde(rename = "sova")]
    Sova,
}

impl Algorithm {
    pub fn siso(self, update_depth: usize) -> SisoAlgorithm {
        match self {
            Algorithm::MaxLogMap => SisoAlgorithm::MaxLogMap,
            Algorithm::Sova => SisoAlgorithm::Sova { update_depth },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Unit gain, noise only.
    Awgn,
    Epa,
    Eva,
}

impl ChannelKind {
    pub fn profile(self) -> Option<ProfileName> {
        match self {
            ChannelKind::Awgn => None,
            ChannelKind::Epa => Some(ProfileName::Epa),
            ChannelKind::Eva => Some(ProfileName::Eva),
        }
    }
}

/// One simulated link and its Monte Carlo limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code: Code,
    /// Data bits per block.
    pub block_size: usize,
    pub rate: Rate,
    pub modulation: Modulation,
    pub channel: ChannelKind,
    /// Terminal speed; the profile default (3 km/h EPA, 30 km/h EVA) if unset.
    pub speed_kmh: Option<f64>,
    pub algorithm: Algorithm,
    pub update_depth: usize,
    pub iterations: usize,
    pub snr_db: Vec<f64>,
    /// Disables the additive noise (the SNR list is still iterated).
    pub noiseless: bool,
    pub min_errors: u64,
    pub max_blocks: u64,
    pub seed: u64,
    pub workers: usize,
    pub ofdm: OfdmConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            code: Code::DuoBinary,
            block_size: 288,
            rate: Rate::R1_2,
            modulation: Modulation::Qpsk,
            channel: ChannelKind::Epa,
            speed_kmh: None,
            algorithm: Algorithm::MaxLogMap,
            update_depth: DEFAULT_UPDATE_DEPTH,
            iterations: 8,
            snr_db: vec![0.0],
            noiseless: false,
            min_errors: 100,
            max_blocks: 1_000_000,
            seed: 1,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            ofdm: OfdmConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn speed(&self) -> f64 {
        self.speed_kmh
            .or_else(|| self.channel.profile().map(ProfileName::default_speed_kmh))
            .unwrap_or(0.0)
    }

    pub fn turbo_config(&self) -> TurboConfig {
        TurboConfig {
            iterations: self.iterations,
            algorithm: self.algorithm.siso(self.update_depth),
            ..TurboConfig::default()
        }
    }

    pub fn validate(&self) -> SimResult<()> {
        if self.iterations == 0 {
            return Err(SimError::config("iters", "at least one iteration is required"));
        }
        if self.algorithm == Algorithm::Sova && self.update_depth < 15 {
            return Err(SimError::config("update_depth", "must be at least 15 steps"));
        }
        if self.snr_db.is_empty() {
            return Err(SimError::config("snr", "the SNR list is empty"));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(SimError::config("snr", format!("{s} is not a finite dB value")));
        }
        if self.max_blocks == 0 {
            return Err(SimError::config("max_blocks", "must be positive"));
        }
        if self.workers == 0 {
            return Err(SimError::config("workers", "must be positive"));
        }
        if let Some(v) = self.speed_kmh {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SimError::config("speed", format!("{v} km/h")));
            }
        }
        self.ofdm.validate()
    }
}

/// One Monte Carlo measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub blocks: u64,
    #[serde(rename = "blk_err")]
    pub block_errors: u64,
    #[serde(rename = "bit_err")]
    pub bit_errors: u64,
    pub bler: f64,
    pub adds_per_block: f64,
    pub cmps_per_block: f64,
}

/// Outcome of one simulated block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub bit_errors: u64,
    pub block_error: bool,
    pub counters: OpCounters,
    /// Bit errors after each iteration, when requested.
    pub errors_per_iteration: Vec<u64>,
}

/// A configuration prepared for simulation.
#[derive(Debug)]
pub struct Link {
    cfg: SimConfig,
    code: TurboCode,
    ofdm: Ofdm,
    interleaver: ChannelInterleaver,
    profile: Option<TdlProfile>,
    ofdm_symbols: usize,
}

impl Link {
    pub fn new(cfg: &SimConfig) -> SimResult<Self> {
        cfg.validate()?;
        let code = TurboCode::new(cfg.code.kind(), cfg.block_size, cfg.rate.code_rate()).map_err(|e| {
            SimError::config("block_size", format!("{} bits at rate {:?}: {e}", cfg.block_size, cfg.rate))
        })?;
        let ofdm = Ofdm::new(cfg.ofdm)?;
        let tx_bits = code.encoded_len();
        let bps = cfg.modulation.bits_per_symbol();
        let ofdm_symbols = ofdm.symbols_for(tx_bits.div_ceil(bps));
        let profile = cfg
            .channel
            .profile()
            .map(|p| build_profile(p, cfg.speed(), cfg.ofdm.carrier_freq))
            .transpose()?;
        Ok(Self {
            interleaver: ChannelInterleaver::new(tx_bits, CHANNEL_INTERLEAVER_SEED),
            cfg: cfg.clone(),
            code,
            ofdm,
            profile,
            ofdm_symbols,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn code(&self) -> &TurboCode {
        &self.code
    }

    /// OFDM symbols carrying one code block.
    pub fn ofdm_symbols(&self) -> usize {
        self.ofdm_symbols
    }

    fn block_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index);
        rng
    }

    /// Runs block `index` through encoder, modem, channel and decoder.
    pub fn simulate_block(&self, snr_db: f64, index: u64, per_iteration: bool) -> SimResult<BlockOutcome> {
        let cfg = &self.cfg;
        let ocfg = self.ofdm.config();
        let mut rng = self.block_rng(index);
        let data: Vec<u8> = (0..cfg.block_size).map(|_| rng.random_range(0..2u8)).collect();
        let coded = self.interleaver.interleave(&self.code.encode(&data)?)?;
        let capacity = self.ofdm_symbols * ocfg.used_subcarriers * cfg.modulation.bits_per_symbol();
        let mut bits = coded;
        let tx_bits = bits.len();
        bits.extend((tx_bits..capacity).map(|_| rng.random_range(0..2u8)));
        let samples = self.ofdm.modulate(&map_symbols(&bits, cfg.modulation)?)?;

        let realization = match &self.profile {
            Some(p) => generate_block_fading(p, ocfg, self.ofdm_symbols, &mut rng)?,
            None => ChannelRealization::flat(samples.len(), ocfg.symbol_len(), ocfg.sampling_rate)?,
        };
        let snr = if cfg.noiseless { f64::INFINITY } else { snr_db };
        let rx = apply_channel(&samples, &realization, snr, &mut rng)?;
        let y = self.ofdm.demodulate(&rx)?;
        let mut h = Vec::with_capacity(y.len());
        for s in 0..self.ofdm_symbols {
            h.extend(frequency_response(&realization, ocfg, s)?);
        }
        let (z, erased) = zf_equalize(&y, &h)?;
        let noise_var = noise_variance(snr).max(NOISELESS_DEMAP_VAR);
        let mut llrs = demap_block(&z, &h, &erased, cfg.modulation, noise_var)?;
        llrs.truncate(tx_bits);
        let llrs = self.interleaver.deinterleave(&llrs)?;

        let mut tcfg = cfg.turbo_config();
        tcfg.keep_history = per_iteration;
        let out = TurboDecoder::new(&self.code, &tcfg).decode(&llrs)?;
        let count = |bits: &[u8]| bits.iter().zip(&data).filter(|(a, b)| a != b).count() as u64;
        let bit_errors = count(&out.bits);
        let errors_per_iteration = out
            .history
            .iter()
            .map(|l| {
                let t = self.code.trellis();
                let hard: Vec<u8> = l
                    .hard_symbols()
                    .into_iter()
                    .flat_map(|u| (0..t.bits_per_step()).map(move |i| t.input_bit(u, i) as u8))
                    .collect();
                count(&hard)
            })
            .collect();
        Ok(BlockOutcome {
            bit_errors,
            block_error: bit_errors > 0,
            counters: out.counters,
            errors_per_iteration,
        })
    }

    /// Simulates blocks `range` in parallel, returned in index order.
    pub fn simulate_range(
        &self,
        snr_db: f64,
        range: std::ops::Range<u64>,
        per_iteration: bool,
    ) -> SimResult<Vec<BlockOutcome>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| SimError::input(format!("worker pool: {e}")))?;
        pool.install(|| {
            range
                .into_par_iter()
                .map(|i| self.simulate_block(snr_db, i, per_iteration))
                .collect()
        })
    }

    /// Simulates until `min_errors` block errors or `max_blocks` blocks.
    pub fn run_point(&self, snr_db: f64) -> SimResult<BlerPoint> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| SimError::input(format!("worker pool: {e}")))?;
        let (mut blocks, mut blk_err, mut bit_err) = (0u64, 0u64, 0u64);
        let mut ops = OpCounters::ZERO;
        while blocks < self.cfg.max_blocks && blk_err < self.cfg.min_errors {
            let end = (blocks + BATCH).min(self.cfg.max_blocks);
            let batch: Vec<BlockOutcome> = pool.install(|| {
                (blocks..end)
                    .into_par_iter()
                    .map(|i| self.simulate_block(snr_db, i, false))
                    .collect::<SimResult<_>>()
            })?;
            for o in batch {
                blk_err += u64::from(o.block_error);
                bit_err += o.bit_errors;
                ops += o.counters;
            }
            blocks = end;
        }
        Ok(BlerPoint {
            snr_db,
            blocks,
            block_errors: blk_err,
            bit_errors: bit_err,
            bler: blk_err as f64 / blocks as f64,
            adds_per_block: ops.additions as f64 / blocks as f64,
            cmps_per_block: ops.comparisons as f64 / blocks as f64,
        })
    }
}

pub fn run_bler_point(cfg: &SimConfig, snr_db: f64) -> SimResult<BlerPoint> {
    Link::new(cfg)?.run_point(snr_db)
}

/// Metadata written next to a sweep's CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub git_hash: String,
    pub config: SimConfig,
}

impl RunRecord {
    pub fn new(config: &SimConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_hash: env!("TURBOFEC_GIT_HASH").to_string(),
            config: config.clone(),
        }
    }
}

/// One point per configured SNR; with `out`, writes the CSV there and the
/// configuration to the same path with a `.json` extension.
pub fn run_sweep(cfg: &SimConfig, out: Option<&Path>) -> SimResult<Vec<BlerPoint>> {
    let link = Link::new(cfg)?;
    let points = cfg
        .snr_db
        .iter()
        .map(|&s| link.run_point(s))
        .collect::<SimResult<Vec<_>>>()?;
    if let Some(path) = out {
        write_csv(path, &points)?;
        let f = File::create(sidecar_path(path))?;
        serde_json::to_writer_pretty(f, &RunRecord::new(cfg))?;
    }
    Ok(points)
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_csv(path: &Path, points: &[BlerPoint]) -> SimResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> SimResult<Vec<BlerPoint>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|p| p.map_err(SimError::from)).collect()
}

/// SNR where the curve crosses `target` BLER, interpolating `log10(BLER)`
/// linearly between the first pair of points that brackets it. A zero BLER
/// is floored at half a block error.
pub fn snr_at_bler(points: &[BlerPoint], target: f64) -> Option<f64> {
    let mut pts: Vec<&BlerPoint> = points.iter().collect();
    pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    let lg = |p: &BlerPoint| p.bler.max(0.5 / p.blocks.max(1) as f64).log10();
    let t = target.log10();
    for w in pts.windows(2) {
        let (a, b) = (lg(w[0]), lg(w[1]));
        if a >= t && b < t {
            return Some(w[0].snr_db + (t - a) / (b - a) * (w[1].snr_db - w[0].snr_db));
        }
    }
    None
}

/// Operation counts of one constituent decoding pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpsRow {
    pub code: Code,
    pub algorithm: Algorithm,
    pub additions: f64,
    pub comparisons: f64,
}

/// Data bits of the block used for operation counts.
pub const OPS_BLOCK_SIZE: usize = 384;
/// QPSK SNR over AWGN at which operation counts are taken.
pub const OPS_SNR_DB: f64 = 1.0;
pub const OPS_BLOCKS: u64 = 100;

/// Mean operations of the first pass of the first constituent decoder on a
/// 384-bit rate-1/2 block (QPSK over AWGN at [`OPS_SNR_DB`], zero a-priori
/// input), over [`OPS_BLOCKS`] blocks. Max-Log-MAP counts do not depend on
/// the data; SOVA counts do through the reliability updates. The extrinsic
/// exchange between decoders is not included.
pub fn report_ops(code: Code, algorithm: Algorithm, update_depth: usize) -> SimResult<OpsRow> {
    let tc = TurboCode::new(code.kind(), OPS_BLOCK_SIZE, CodeRate::R1_2)?;
    let t = tc.trellis();
    let siso = algorithm.siso(update_depth);
    let mut dec = SisoDecoder::new(t, siso);
    let sigma = (noise_variance(OPS_SNR_DB) / 2.0).sqrt();
    let apriori = vec![0.0; tc.steps() * (t.arity() - 1)];
    let mut out = vec![0.0; apriori.len()];
    for b in 0..OPS_BLOCKS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b5);
        rng.set_stream(b);
        let data: Vec<u8> = (0..OPS_BLOCK_SIZE).map(|_| rng.random_range(0..2u8)).collect();
        let mut tx = tc.encode(&data)?;
        if tx.len() % 2 == 1 {
            tx.push(0);
        }
        let one = Complex64::new(1.0, 0.0);
        let sym = map_symbols(&tx, Modulation::Qpsk)?;
        let z: Vec<Complex64> = sym
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                s + Complex64::new(re, im) * sigma
            })
            .collect();
        let mut llrs = demap_block(&z, &vec![one; z.len()], &vec![false; z.len()], Modulation::Qpsk, noise_variance(OPS_SNR_DB))?;
        llrs.truncate(tc.encoded_len());
        let ch = tc.puncture().depuncture(&llrs, tc.steps(), tc.tail_len())?;
        let input = SisoInput {
            systematic: &ch.systematic,
            parity: &ch.parity1,
            apriori: &apriori,
            tail: &ch.tail1,
        };
        dec.decode_into(t, &input, tc.boundary(), &mut out)?;
    }
    let c = dec.counters();
    Ok(OpsRow {
        code,
        algorithm,
        additions: c.additions as f64 / OPS_BLOCKS as f64,
        comparisons: c.comparisons as f64 / OPS_BLOCKS as f64,
    })
}

/// The four rows of the complexity table.
pub fn ops_table(update_depth: usize) -> SimResult<Vec<OpsRow>> {
    let mut rows = Vec::new();
    for code in [Code::Binary, Code::DuoBinary] {
        for algorithm in [Algorithm::Sova, Algorithm::MaxLogMap] {
            rows.push(report_ops(code, algorithm, update_depth)?);
        }
    }
    Ok(rows)
}

/// Noiseless full-chain check over every code, modulation and rate for the
/// given block sizes; returns the configurations that failed.
pub fn selftest(block_sizes: &[usize], blocks: u64) -> SimResult<Vec<String>> {
    let mut failures = Vec::new();
    for code in [Code::Binary, Code::DuoBinary] {
        for modulation in [Modulation::Qpsk, Modulation::Qam16] {
            for rate in [Rate::R1_2, Rate::R2_3, Rate::R3_4] {
                for &block_size in block_sizes {
                    for channel in [ChannelKind::Epa, ChannelKind::Eva] {
                        let cfg = SimConfig {
                            code,
                            block_size,
                            rate,
                            modulation,
                            channel,
                            noiseless: true,
                            iterations: 2,
                            workers: 1,
                            ..SimConfig::default()
                        };
                        let link = Link::new(&cfg)?;
                        let errors: u64 = link
                            .simulate_range(0.0, 0..blocks, false)?
                            .iter()
                            .map(|o| o.bit_errors)
                            .sum();
                        if errors > 0 {
                            failures.push(format!(
                                "{code:?} {modulation} {rate:?} {block_size} {channel:?}: {errors} bit errors"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(failures)
}

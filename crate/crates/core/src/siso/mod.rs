//! Soft-input soft-output constituent decoders.
//!
//! Both decoders work on symbol LLRs: for every trellis step they take the
//! channel LLRs of the systematic and parity bits plus a-priori symbol LLRs
//! and return a-posteriori symbol LLRs `ln P(v | y) / P(0 | y)`.
//!
//! # Operation counting
//!
//! Every decode call adds to an [`OpCounters`]. One *addition* is a scalar
//! add or subtract on metrics; one *comparison* is a pairwise max or min.
//! Specifically:
//!
//! - Branch metrics: a symbol metric with `b` bits set costs `b - 1` adds,
//!   adding the a-priori term costs one add per non-zero symbol, and joining
//!   a non-zero systematic part with a non-zero parity part costs one add.
//! - An `n`-way maximum costs `n - 1` comparisons.
//! - Max-Log-MAP: one add per branch in the forward recursion, one per branch
//!   in the backward recursion (`gamma + beta`), one per branch when forming
//!   `alpha + gamma + beta`, and `arity - 1` subtractions for the output.
//! - SOVA: one add per branch in the add-compare-select. A two-way compare
//!   yields the metric difference as a by-product; with more candidates each
//!   competitor difference costs one subtraction. Each reliability update is
//!   one comparison (a min), and only happens where the competitor disagrees
//!   with the survivor.
//! - Input clamping and the extrinsic subtraction done by the turbo loop are
//!   not counted.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign};

use crate::error::{invalid, Result};
use crate::llr::{clamp_llr, SymbolLlrBlock};
use crate::trellis::{Termination, TrellisSpec};

mod maxlog;
mod sova;

pub use maxlog::max_log_map;
pub use sova::{sova, DEFAULT_UPDATE_DEPTH, RELIABILITY_CEILING, TAILBITING_EXTENSION};

/// Addition and comparison tallies of a decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OpCounters {
    pub additions: u64,
    pub comparisons: u64,
}

impl OpCounters {
    pub const ZERO: OpCounters = OpCounters {
        additions: 0,
        comparisons: 0,
    };

    #[inline]
    pub(crate) fn add(&mut self, additions: usize, comparisons: usize) {
        self.additions += additions as u64;
        self.comparisons += comparisons as u64;
    }
}

impl Add for OpCounters {
    type Output = OpCounters;

    fn add(self, rhs: OpCounters) -> OpCounters {
        OpCounters {
            additions: self.additions + rhs.additions,
            comparisons: self.comparisons + rhs.comparisons,
        }
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: OpCounters) {
        *self = *self + rhs;
    }
}

/// How the decoder treats the ends of the trellis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Starts and ends in state 0, with tail steps after the data.
    Terminated,
    /// Tailbiting with approximate circular boundaries: a wrap-around
    /// warm-up for Max-Log-MAP, a cyclic extension for SOVA.
    Tailbiting,
    /// Tailbiting decoded exactly over all codewords whose start and end
    /// states agree (one constrained pass per start state). Max-Log-MAP only.
    TailbitingExact,
}

impl From<Termination> for Boundary {
    fn from(t: Termination) -> Self {
        match t {
            Termination::TailBits => Boundary::Terminated,
            Termination::Tailbiting => Boundary::Tailbiting,
        }
    }
}

/// Constituent decoding algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SisoAlgorithm {
    MaxLogMap,
    /// Soft-output Viterbi; `update_depth` is the reliability update window
    /// in trellis steps.
    Sova { update_depth: usize },
}

impl SisoAlgorithm {
    pub fn sova() -> Self {
        SisoAlgorithm::Sova {
            update_depth: DEFAULT_UPDATE_DEPTH,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SisoAlgorithm::MaxLogMap => "max-log-map",
            SisoAlgorithm::Sova { .. } => "sova",
        }
    }
}

/// Channel and a-priori inputs of one constituent decoding pass.
#[derive(Debug, Clone, Copy)]
pub struct SisoInput<'a> {
    /// `bits_per_step` bit LLRs per data step.
    pub systematic: &'a [f64],
    /// `parity_per_step` bit LLRs per data step.
    pub parity: &'a [f64],
    /// `arity - 1` symbol LLRs per data step.
    pub apriori: &'a [f64],
    /// Tail symbols of a terminated trellis: per tail step the input bit
    /// LLRs followed by the parity bit LLRs. Empty for tailbiting.
    pub tail: &'a [f64],
}

impl SisoInput<'_> {
    /// Validates lengths against `trellis` and returns the data step count.
    pub fn steps(&self, trellis: &TrellisSpec, boundary: Boundary) -> Result<usize> {
        let bps = trellis.bits_per_step();
        if self.systematic.len() % bps != 0 {
            return Err(invalid!(
                "systematic length {} is not a multiple of {bps}",
                self.systematic.len()
            ));
        }
        let n = self.systematic.len() / bps;
        if n == 0 {
            return Err(invalid!("empty block"));
        }
        if self.parity.len() != n * trellis.parity_per_step() {
            return Err(invalid!(
                "parity length {} does not match {n} steps",
                self.parity.len()
            ));
        }
        if self.apriori.len() != n * (trellis.arity() - 1) {
            return Err(invalid!(
                "a-priori length {} does not match {n} steps",
                self.apriori.len()
            ));
        }
        let tail_len = match boundary {
            Boundary::Terminated => trellis.tail_steps() * (bps + trellis.parity_per_step()),
            _ => 0,
        };
        if self.tail.len() != tail_len {
            return Err(invalid!(
                "tail length {} but {tail_len} expected",
                self.tail.len()
            ));
        }
        Ok(n)
    }
}

/// Flattened trellis connectivity with branch-metric indices.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub states: usize,
    pub arity: usize,
    /// Distinct parity patterns per step.
    pub parity_combos: usize,
    /// `[state * arity + u] -> (next state, gamma index u * P + p)`
    pub out: Vec<(usize, usize)>,
    /// `[state * arity + i] -> (prev state, input, gamma index)`
    pub inc: Vec<(usize, usize, usize)>,
    /// Tail branch per state: `(input, next, gamma index)`.
    pub tail_out: Vec<(usize, usize, usize)>,
    /// Tail branches entering each state: `(prev state, input, gamma index)`.
    pub tail_in: Vec<Vec<(usize, usize, usize)>>,
    pub bits_per_step: usize,
    pub parity_per_step: usize,
    pub tail_steps: usize,
}

impl Lattice {
    pub fn new(t: &TrellisSpec) -> Self {
        let s_n = t.num_states();
        let m = t.arity();
        let pc = 1usize << t.parity_per_step();
        let gidx = |s: usize, u: usize| u * pc + t.parity_bits(s, u);
        let mut out = Vec::with_capacity(s_n * m);
        for s in 0..s_n {
            for u in 0..m {
                out.push((t.next_state(s, u), gidx(s, u)));
            }
        }
        let mut inc = Vec::with_capacity(s_n * m);
        for ns in 0..s_n {
            for &(s, u) in t.incoming(ns) {
                let (s, u) = (usize::from(s), usize::from(u));
                inc.push((s, u, gidx(s, u)));
            }
        }
        let mut tail_in = vec![Vec::new(); s_n];
        let tail_out = (0..s_n)
            .map(|s| {
                let u = t.tail_input(s);
                let ns = t.next_state(s, u);
                tail_in[ns].push((s, u, gidx(s, u)));
                (u, ns, gidx(s, u))
            })
            .collect();
        Self {
            states: s_n,
            arity: m,
            parity_combos: pc,
            out,
            inc,
            tail_out,
            tail_in,
            bits_per_step: t.bits_per_step(),
            parity_per_step: t.parity_per_step(),
            tail_steps: t.tail_steps(),
        }
    }

    pub fn gamma_len(&self) -> usize {
        self.arity * self.parity_combos
    }

    /// Fills one step of branch metrics `gamma[u * P + p]`: the log-likelihood
    /// of input `u` with parity pattern `p` relative to the all-zero branch.
    pub fn branch_metrics(
        &self,
        sys: &[f64],
        par: &[f64],
        apriori: Option<&[f64]>,
        gamma: &mut [f64],
        counters: &mut OpCounters,
    ) {
        let m = self.arity;
        let pc = self.parity_combos;
        let bps = self.bits_per_step;
        let mut sym = [0.0f64; 16];
        let mut adds = 0;
        for u in 1..m {
            let low = u & u.wrapping_neg();
            let pos = bps - 1 - low.trailing_zeros() as usize;
            let rest = u ^ low;
            sym[u] = if rest == 0 {
                clamp_llr(sys[pos])
            } else {
                adds += 1;
                sym[rest] + clamp_llr(sys[pos])
            };
        }
        if let Some(la) = apriori {
            for u in 1..m {
                sym[u] += clamp_llr(la[u - 1]);
                adds += 1;
            }
        }
        let mut parm = [0.0f64; 16];
        for p in 1..pc {
            let low = p & p.wrapping_neg();
            let j = low.trailing_zeros() as usize;
            let rest = p ^ low;
            parm[p] = if rest == 0 {
                clamp_llr(par[j])
            } else {
                adds += 1;
                parm[rest] + clamp_llr(par[j])
            };
        }
        for u in 0..m {
            for p in 0..pc {
                gamma[u * pc + p] = if u == 0 {
                    parm[p]
                } else if p == 0 {
                    sym[u]
                } else {
                    adds += 1;
                    sym[u] + parm[p]
                };
            }
        }
        counters.add(adds, 0);
    }

    /// Branch metrics for the data steps followed by the tail steps.
    pub fn gamma_table(
        &self,
        input: &SisoInput<'_>,
        steps: usize,
        gamma: &mut Vec<f64>,
        counters: &mut OpCounters,
    ) {
        let g = self.gamma_len();
        let bps = self.bits_per_step;
        let pp = self.parity_per_step;
        let ap = self.arity - 1;
        let tail_steps = input.tail.len() / (bps + pp);
        gamma.clear();
        gamma.resize((steps + tail_steps) * g, 0.0);
        for k in 0..steps {
            self.branch_metrics(
                &input.systematic[k * bps..(k + 1) * bps],
                &input.parity[k * pp..(k + 1) * pp],
                Some(&input.apriori[k * ap..(k + 1) * ap]),
                &mut gamma[k * g..(k + 1) * g],
                counters,
            );
        }
        for (i, chunk) in input.tail.chunks_exact(bps + pp).enumerate() {
            let k = steps + i;
            self.branch_metrics(
                &chunk[..bps],
                &chunk[bps..],
                None,
                &mut gamma[k * g..(k + 1) * g],
                counters,
            );
        }
    }
}

/// A reusable constituent decoder with cumulative operation counters.
#[derive(Debug, Clone)]
pub struct SisoDecoder {
    lattice: Lattice,
    algorithm: SisoAlgorithm,
    counters: OpCounters,
    work: Workspace,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Workspace {
    pub gamma: Vec<f64>,
    pub metrics: Vec<f64>,
    pub scratch: Vec<f64>,
    pub decisions: Vec<u8>,
    pub deltas: Vec<f64>,
    pub path: Vec<usize>,
}

impl SisoDecoder {
    pub fn new(trellis: &TrellisSpec, algorithm: SisoAlgorithm) -> Self {
        Self {
            lattice: Lattice::new(trellis),
            algorithm,
            counters: OpCounters::ZERO,
            work: Workspace::default(),
        }
    }

    pub fn algorithm(&self) -> SisoAlgorithm {
        self.algorithm
    }

    /// Counters accumulated since construction or the last reset.
    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = OpCounters::ZERO;
    }

    /// Runs one pass and writes `arity - 1` a-posteriori symbol LLRs per data
    /// step into `out`.
    pub fn decode_into(
        &mut self,
        trellis: &TrellisSpec,
        input: &SisoInput<'_>,
        boundary: Boundary,
        out: &mut [f64],
    ) -> Result<()> {
        let steps = input.steps(trellis, boundary)?;
        if out.len() != steps * (trellis.arity() - 1) {
            return Err(invalid!("output buffer of length {} does not fit {steps} steps", out.len()));
        }
        match self.algorithm {
            SisoAlgorithm::MaxLogMap => maxlog::run(
                &self.lattice,
                input,
                steps,
                boundary,
                &mut self.work,
                &mut self.counters,
                out,
            ),
            SisoAlgorithm::Sova { update_depth } => sova::run(
                &self.lattice,
                input,
                steps,
                boundary,
                update_depth,
                &mut self.work,
                &mut self.counters,
                out,
            ),
        }
    }

    pub fn decode(
        &mut self,
        trellis: &TrellisSpec,
        input: &SisoInput<'_>,
        boundary: Boundary,
    ) -> Result<SymbolLlrBlock> {
        let steps = input.steps(trellis, boundary)?;
        let mut out = SymbolLlrBlock::zeros(
            crate::llr::LlrRole::Aposteriori,
            trellis.arity(),
            steps,
        );
        self.decode_into(trellis, input, boundary, out.values_mut())?;
        Ok(out)
    }
}

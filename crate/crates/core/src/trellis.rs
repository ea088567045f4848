//! Constituent recursive systematic convolutional (RSC) encoders.
//!
//! Two trellises are provided, both 8-state with constraint length 4:
//!
//! - [`TrellisSpec::binary_rsc`]: one input bit per step, feedback
//!   `1 + D^2 + D^3`, parity `1 + D + D^3`. Tail-terminated.
//! - [`TrellisSpec::duobinary_rsc`]: one couple `(A, B)` per step, feedback
//!   `1 + D + D^3`, parities `Y = 1 + D^2 + D^3` and `W = 1 + D^3`, with the
//!   `B` input also added into the inputs of the second and third registers.
//!   Tailbiting through the circulation state.
//!
//! Polynomials are bitmasks where bit `i` is the coefficient of `D^i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, unsupported, Result};

/// `1 + D + D^3`
pub const POLY_1_D_D3: u8 = 0b1011;
/// `1 + D^2 + D^3`
pub const POLY_1_D2_D3: u8 = 0b1101;
/// `1 + D^3`
pub const POLY_1_D3: u8 = 0b1001;

/// Which of the two constituent circuits a trellis describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeKind {
    /// One bit per step, tail-terminated.
    Binary,
    /// One couple per step, tailbiting.
    DuoBinary,
}

impl CodeKind {
    pub fn bits_per_step(self) -> usize {
        match self {
            CodeKind::Binary => 1,
            CodeKind::DuoBinary => 2,
        }
    }

    /// Termination used by the standard code built on this circuit.
    pub fn native_termination(self) -> Termination {
        match self {
            CodeKind::Binary => Termination::TailBits,
            CodeKind::DuoBinary => Termination::Tailbiting,
        }
    }
}

/// How an encoded block is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// Extra steps drive the register back to state 0; the tail symbols are
    /// transmitted.
    TailBits,
    /// The encoder starts in the state it ends in; no tail.
    Tailbiting,
}

/// Feedback and parity polynomials of an RSC encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    feedback: u8,
    parities: Vec<u8>,
    constraint_length: u8,
}

impl GeneratorSet {
    pub fn new(feedback: u8, parities: Vec<u8>, constraint_length: u8) -> Result<Self> {
        if !(2..=8).contains(&constraint_length) {
            return Err(invalid!("constraint length {constraint_length} out of range"));
        }
        if feedback & 1 == 0 {
            return Err(invalid!("feedback polynomial {feedback:#b} has no constant term"));
        }
        if parities.is_empty() {
            return Err(invalid!("at least one parity polynomial is required"));
        }
        let limit = 1u16 << constraint_length;
        for &p in core::iter::once(&feedback).chain(parities.iter()) {
            if u16::from(p) >= limit {
                return Err(invalid!(
                    "polynomial {p:#b} has degree >= constraint length {constraint_length}"
                ));
            }
        }
        Ok(Self {
            feedback,
            parities,
            constraint_length,
        })
    }

    pub fn feedback(&self) -> u8 {
        self.feedback
    }

    pub fn parities(&self) -> &[u8] {
        &self.parities
    }

    pub fn constraint_length(&self) -> usize {
        usize::from(self.constraint_length)
    }

    pub fn memory(&self) -> usize {
        self.constraint_length() - 1
    }
}

/// Encoder output for one constituent encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStreams {
    /// Copy of the input data (`bits_per_step` bits per step).
    pub systematic: Vec<u8>,
    /// One stream per parity polynomial, one bit per data step.
    pub parity: Vec<Vec<u8>>,
    /// Tail symbols, empty for tailbiting. Each tail step contributes its
    /// input bits followed by its parity bits.
    pub tail: Vec<u8>,
    pub start_state: usize,
    pub final_state: usize,
}

/// Linear map on the register state over GF(2), stored by the images of the
/// unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Gf2Map {
    cols: [u8; 8],
    dim: usize,
}

impl Gf2Map {
    fn identity(dim: usize) -> Self {
        let mut cols = [0u8; 8];
        for (j, c) in cols.iter_mut().enumerate().take(dim) {
            *c = 1 << j;
        }
        Self { cols, dim }
    }

    fn apply(&self, x: usize) -> usize {
        let mut y = 0u8;
        for j in 0..self.dim {
            if x >> j & 1 == 1 {
                y ^= self.cols[j];
            }
        }
        usize::from(y)
    }

    fn compose(&self, inner: &Gf2Map) -> Gf2Map {
        let mut cols = [0u8; 8];
        for j in 0..self.dim {
            cols[j] = self.apply(usize::from(inner.cols[j])) as u8;
        }
        Gf2Map { cols, dim: self.dim }
    }

    fn add(&self, other: &Gf2Map) -> Gf2Map {
        let mut cols = self.cols;
        for (c, o) in cols.iter_mut().zip(other.cols.iter()) {
            *c ^= o;
        }
        Gf2Map { cols, dim: self.dim }
    }

    /// Gauss-Jordan elimination on `[M | I]`.
    fn inverse(&self) -> Option<Gf2Map> {
        let n = self.dim;
        // rows[i]: low byte = row i of M, high byte = row i of I
        let mut rows = [0u16; 8];
        for (i, row) in rows.iter_mut().enumerate().take(n) {
            let mut r = 0u16;
            for j in 0..n {
                if self.cols[j] >> i & 1 == 1 {
                    r |= 1 << j;
                }
            }
            *row = r | (1 << (8 + i));
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| rows[r] >> col & 1 == 1)?;
            rows.swap(col, pivot);
            for r in 0..n {
                if r != col && rows[r] >> col & 1 == 1 {
                    rows[r] ^= rows[col];
                }
            }
        }
        let mut cols = [0u8; 8];
        for (i, row) in rows.iter().enumerate().take(n) {
            let inv_row = (row >> 8) as u8;
            for (j, c) in cols.iter_mut().enumerate().take(n) {
                if inv_row >> j & 1 == 1 {
                    *c |= 1 << i;
                }
            }
        }
        Some(Gf2Map { cols, dim: n })
    }
}

/// Finite-state machine of a constituent encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrellisSpec {
    kind: CodeKind,
    generators: GeneratorSet,
    num_states: usize,
    arity: usize,
    bits_per_step: usize,
    next: Vec<u8>,
    parity: Vec<u8>,
    tail_input: Vec<u8>,
    incoming: Vec<(u8, u8)>,
    /// Period of the zero-input state recursion.
    period: usize,
    /// `circulation[r][s_n]` for `r = N mod period`; row 0 unused.
    circulation: Vec<Vec<u8>>,
}

impl TrellisSpec {
    /// Binary 8-state RSC: feedback `1 + D^2 + D^3`, parity `1 + D + D^3`.
    ///
    /// `w = u ^ s2 ^ s3`, `v = w ^ s1 ^ s3`, then `s3 <- s2, s2 <- s1, s1 <- w`.
    pub fn binary_rsc() -> Self {
        let gens = GeneratorSet::new(POLY_1_D2_D3, vec![POLY_1_D_D3], 4)
            .expect("static generator set");
        Self::binary_from_generators(gens)
    }

    /// Binary RSC for an arbitrary generator set.
    pub fn binary_from_generators(generators: GeneratorSet) -> Self {
        let m = generators.memory();
        let fb = generators.feedback();
        let pars = generators.parities().to_vec();
        Self::build(CodeKind::Binary, generators, move |state, input| {
            let reg = |i: usize| (state >> (m - i)) & 1;
            let mut w = input & 1;
            for i in 1..=m {
                if fb >> i & 1 == 1 {
                    w ^= reg(i);
                }
            }
            let mut parity = 0usize;
            for (j, &g) in pars.iter().enumerate() {
                let mut v = if g & 1 == 1 { w } else { 0 };
                for i in 1..=m {
                    if g >> i & 1 == 1 {
                        v ^= reg(i);
                    }
                }
                parity |= v << j;
            }
            let next = (w << (m - 1)) | (state >> 1);
            (next, parity)
        })
    }

    /// Duo-binary 8-state RSC of the DVB-RCS / 802.16 turbo code.
    ///
    /// With couple value `2A + B`:
    /// `w = A ^ B ^ s1 ^ s3`, `Y = w ^ s2 ^ s3`, `W = w ^ s3`, then
    /// `s1 <- w, s2 <- s1 ^ B, s3 <- s2 ^ B`.
    pub fn duobinary_rsc() -> Self {
        let gens = GeneratorSet::new(POLY_1_D_D3, vec![POLY_1_D2_D3, POLY_1_D3], 4)
            .expect("static generator set");
        let fb = gens.feedback();
        let pars = gens.parities().to_vec();
        Self::build(CodeKind::DuoBinary, gens, move |state, input| {
            let (s1, s2, s3) = (state >> 2 & 1, state >> 1 & 1, state & 1);
            let regs = [0, s1, s2, s3];
            let a = input >> 1 & 1;
            let b = input & 1;
            let mut w = a ^ b;
            for (i, &r) in regs.iter().enumerate().skip(1) {
                if fb >> i & 1 == 1 {
                    w ^= r;
                }
            }
            let mut parity = 0usize;
            for (j, &g) in pars.iter().enumerate() {
                let mut v = if g & 1 == 1 { w } else { 0 };
                for (i, &r) in regs.iter().enumerate().skip(1) {
                    if g >> i & 1 == 1 {
                        v ^= r;
                    }
                }
                parity |= v << j;
            }
            let next = (w << 2) | ((s1 ^ b) << 1) | (s2 ^ b);
            (next, parity)
        })
    }

    fn build(
        kind: CodeKind,
        generators: GeneratorSet,
        circuit: impl Fn(usize, usize) -> (usize, usize),
    ) -> Self {
        let m = generators.memory();
        let num_states = 1usize << m;
        let bits_per_step = kind.bits_per_step();
        let arity = 1usize << bits_per_step;

        let mut next = vec![0u8; num_states * arity];
        let mut parity = vec![0u8; num_states * arity];
        for s in 0..num_states {
            for u in 0..arity {
                let (ns, p) = circuit(s, u);
                next[s * arity + u] = ns as u8;
                parity[s * arity + u] = p as u8;
            }
        }

        let mut incoming = vec![(0u8, 0u8); num_states * arity];
        let mut fill = vec![0usize; num_states];
        for s in 0..num_states {
            for u in 0..arity {
                let ns = usize::from(next[s * arity + u]);
                incoming[ns * arity + fill[ns]] = (s as u8, u as u8);
                fill[ns] += 1;
            }
        }

        // Tail inputs only drive the first bit of the step (B = 0 for couples)
        // and zero the feedback node.
        let msb = 1usize << (m - 1);
        let first_bit = 1usize << (bits_per_step - 1);
        let tail_input = (0..num_states)
            .map(|s| {
                [0, first_bit]
                    .into_iter()
                    .find(|&u| usize::from(next[s * arity + u]) & msb == 0)
                    .expect("RSC feedback can always be cancelled") as u8
            })
            .collect();

        let zero_input = Gf2Map {
            cols: core::array::from_fn(|j| if j < m { next[(1 << j) * arity] } else { 0 }),
            dim: m,
        };
        let identity = Gf2Map::identity(m);
        let mut period = 0;
        let mut power = zero_input;
        for p in 1..=num_states {
            if power == identity {
                period = p;
                break;
            }
            power = power.compose(&zero_input);
        }
        let mut circulation = vec![Vec::new()];
        let mut g_pow = zero_input;
        for _r in 1..period {
            let table = identity
                .add(&g_pow)
                .inverse()
                .map(|inv| (0..num_states).map(|s| inv.apply(s) as u8).collect())
                .unwrap_or_default();
            circulation.push(table);
            g_pow = g_pow.compose(&zero_input);
        }

        Self {
            kind,
            generators,
            num_states,
            arity,
            bits_per_step,
            next,
            parity,
            tail_input,
            incoming,
            period,
            circulation,
        }
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Number of distinct inputs per step (2 or 4).
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bits_per_step(&self) -> usize {
        self.bits_per_step
    }

    pub fn parity_per_step(&self) -> usize {
        self.generators.parities.len()
    }

    pub fn memory(&self) -> usize {
        self.generators.memory()
    }

    /// Tail steps needed to return to state 0.
    pub fn tail_steps(&self) -> usize {
        self.memory()
    }

    /// Native rate before puncturing, as `(data bits, coded bits)` per step.
    pub fn native_rate(&self) -> (usize, usize) {
        (
            self.bits_per_step,
            self.bits_per_step + self.parity_per_step(),
        )
    }

    #[inline]
    pub fn next_state(&self, state: usize, input: usize) -> usize {
        usize::from(self.next[state * self.arity + input])
    }

    /// Parity bits of a branch; bit `j` belongs to parity stream `j`.
    #[inline]
    pub fn parity_bits(&self, state: usize, input: usize) -> usize {
        usize::from(self.parity[state * self.arity + input])
    }

    /// The forced input applied in a tail step from `state`.
    #[inline]
    pub fn tail_input(&self, state: usize) -> usize {
        usize::from(self.tail_input[state])
    }

    /// Branches `(previous state, input)` entering `state`.
    pub fn incoming(&self, state: usize) -> &[(u8, u8)] {
        &self.incoming[state * self.arity..(state + 1) * self.arity]
    }

    /// Period of the zero-input recursion (7 for both codes here).
    pub fn period(&self) -> usize {
        self.period
    }

    /// Input bits of input value `u` in stream order (first bit is the MSB).
    #[inline]
    pub fn input_bit(&self, input: usize, position: usize) -> usize {
        (input >> (self.bits_per_step - 1 - position)) & 1
    }

    /// Packs the data bits of one step into an input value.
    pub fn pack_input(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, &b| acc << 1 | usize::from(b & 1))
    }

    /// Runs the encoder over `data` starting from `start_state`.
    ///
    /// For [`Termination::TailBits`] the tail steps are appended and the final
    /// state is 0. For [`Termination::Tailbiting`] no tail is produced; the
    /// caller provides the circulation state as `start_state` (see
    /// [`TrellisSpec::circulation_state`]).
    pub fn encode(
        &self,
        data: &[u8],
        termination: Termination,
        start_state: usize,
    ) -> Result<EncodedStreams> {
        if data.len() % self.bits_per_step != 0 {
            return Err(invalid!(
                "data length {} is not a multiple of {} bits per step",
                data.len(),
                self.bits_per_step
            ));
        }
        if start_state >= self.num_states {
            return Err(invalid!("start state {start_state} out of range"));
        }
        let steps = data.len() / self.bits_per_step;
        let npar = self.parity_per_step();
        let mut parity = vec![Vec::with_capacity(steps); npar];
        let mut state = start_state;
        for chunk in data.chunks_exact(self.bits_per_step) {
            let u = self.pack_input(chunk);
            let p = self.parity_bits(state, u);
            for (j, stream) in parity.iter_mut().enumerate() {
                stream.push((p >> j & 1) as u8);
            }
            state = self.next_state(state, u);
        }
        let mut tail = Vec::new();
        if termination == Termination::TailBits {
            for _ in 0..self.tail_steps() {
                let u = self.tail_input(state);
                let p = self.parity_bits(state, u);
                for i in 0..self.bits_per_step {
                    tail.push(self.input_bit(u, i) as u8);
                }
                for j in 0..npar {
                    tail.push((p >> j & 1) as u8);
                }
                state = self.next_state(state, u);
            }
        }
        Ok(EncodedStreams {
            systematic: data.to_vec(),
            parity,
            tail,
            start_state,
            final_state: state,
        })
    }

    /// State reached from `start` after feeding `data` (no tail).
    pub fn run(&self, data: &[u8], start: usize) -> usize {
        data.chunks_exact(self.bits_per_step)
            .fold(start, |s, c| self.next_state(s, self.pack_input(c)))
    }

    /// Circulation state for tailbiting: the start state that the encoder
    /// returns to after `data`.
    ///
    /// Computed from a zero-state pre-encoding pass, `Sc = (I + G^N)^-1 S_N`,
    /// with the inverses tabulated per `N mod period`.
    pub fn circulation_state(&self, data: &[u8]) -> Result<usize> {
        if data.len() % self.bits_per_step != 0 {
            return Err(invalid!(
                "data length {} is not a multiple of {} bits per step",
                data.len(),
                self.bits_per_step
            ));
        }
        let steps = data.len() / self.bits_per_step;
        let r = self.circulation_residue(steps)?;
        let s_n = self.run(data, 0);
        Ok(usize::from(self.circulation[r][s_n]))
    }

    /// Checks that a block of `steps` trellis steps admits tailbiting and
    /// returns `steps mod period`.
    pub fn circulation_residue(&self, steps: usize) -> Result<usize> {
        if steps == 0 {
            return Err(invalid!("empty block"));
        }
        let r = steps % self.period;
        if r == 0 || self.circulation[r].is_empty() {
            return Err(unsupported!(
                "tailbiting needs a block length that is not a multiple of {} steps (got {steps})",
                self.period
            ));
        }
        Ok(r)
    }

    /// Circulation lookup table row for `N mod period = residue`.
    pub fn circulation_table(&self, residue: usize) -> Option<&[u8]> {
        self.circulation
            .get(residue)
            .filter(|t| !t.is_empty())
            .map(|t| t.as_slice())
    }
}

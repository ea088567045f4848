//! Max-Log-MAP (forward-backward with max in place of log-sum-exp).

use alloc::vec;
use alloc::vec::Vec;

use super::{Boundary, Lattice, OpCounters, SisoAlgorithm, SisoDecoder, SisoInput, Workspace};
use crate::error::Result;
use crate::llr::SymbolLlrBlock;
use crate::trellis::TrellisSpec;

/// Warm-up length of the circular boundary estimate for tailbiting.
pub const TAILBITING_WARMUP: usize = 32;

/// One Max-Log-MAP pass. Returns the a-posteriori symbol LLRs and the
/// operations spent.
pub fn max_log_map(
    trellis: &TrellisSpec,
    input: &SisoInput<'_>,
    boundary: Boundary,
) -> Result<(SymbolLlrBlock, OpCounters)> {
    let mut dec = SisoDecoder::new(trellis, SisoAlgorithm::MaxLogMap);
    let out = dec.decode(trellis, input, boundary)?;
    Ok((out, dec.counters()))
}

pub(super) fn run(
    lat: &Lattice,
    input: &SisoInput<'_>,
    n: usize,
    boundary: Boundary,
    work: &mut Workspace,
    counters: &mut OpCounters,
    out: &mut [f64],
) -> Result<()> {
    let s_n = lat.states;
    let m = lat.arity;
    lat.gamma_table(input, n, &mut work.gamma, counters);
    let tail = match boundary {
        Boundary::Terminated => lat.tail_steps,
        _ => 0,
    };
    work.scratch.clear();
    work.scratch.resize(n * m, f64::NEG_INFINITY);
    match boundary {
        Boundary::Terminated => {
            let mut edge = vec![f64::NEG_INFINITY; s_n];
            edge[0] = 0.0;
            pass(lat, n, tail, &work.gamma, &edge, &edge, &mut work.metrics, &mut work.scratch, counters);
        }
        Boundary::Tailbiting => {
            let w = n.min(TAILBITING_WARMUP);
            let alpha0 = warm_alpha(lat, &work.gamma, n - w..n, counters);
            let beta_n = warm_beta(lat, &work.gamma, 0..w, counters);
            pass(lat, n, 0, &work.gamma, &alpha0, &beta_n, &mut work.metrics, &mut work.scratch, counters);
        }
        Boundary::TailbitingExact => {
            let mut run_m = vec![0.0; n * m];
            for s0 in 0..s_n {
                let mut edge = vec![f64::NEG_INFINITY; s_n];
                edge[s0] = 0.0;
                pass(lat, n, 0, &work.gamma, &edge, &edge, &mut work.metrics, &mut run_m, counters);
                for (acc, &v) in work.scratch.iter_mut().zip(&run_m) {
                    *acc = acc.max(v);
                }
                if s0 > 0 {
                    counters.add(0, n * m);
                }
            }
        }
    }
    for (k, o) in out.chunks_exact_mut(m - 1).enumerate() {
        let mk = &work.scratch[k * m..(k + 1) * m];
        for u in 1..m {
            o[u - 1] = mk[u] - mk[0];
        }
    }
    counters.add(n * (m - 1), 0);
    Ok(())
}

/// Forward-backward over `n` data steps and `tail` tail steps. Writes
/// `max over branches with input u of alpha + gamma + beta` per data step
/// into `mvals`.
#[allow(clippy::too_many_arguments)]
fn pass(
    lat: &Lattice,
    n: usize,
    tail: usize,
    gamma: &[f64],
    alpha0: &[f64],
    beta_end: &[f64],
    alpha: &mut Vec<f64>,
    mvals: &mut [f64],
    counters: &mut OpCounters,
) {
    let s_n = lat.states;
    let m = lat.arity;
    let g_len = lat.gamma_len();
    let steps = n + tail;
    alpha.clear();
    alpha.resize((steps + 1) * s_n, f64::NEG_INFINITY);
    alpha[..s_n].copy_from_slice(alpha0);

    for t in 0..steps {
        let g = &gamma[t * g_len..(t + 1) * g_len];
        let (prev, next) = alpha.split_at_mut((t + 1) * s_n);
        let a = &prev[t * s_n..];
        let a_next = &mut next[..s_n];
        if t < n {
            forward_step(lat, a, g, a_next);
            counters.add(s_n * m, s_n * (m - 1));
        } else {
            for (ns, slot) in a_next.iter_mut().enumerate() {
                let branches = &lat.tail_in[ns];
                let mut best = f64::NEG_INFINITY;
                for &(s, _, gi) in branches {
                    best = best.max(a[s] + g[gi]);
                }
                *slot = best;
                counters.add(branches.len(), branches.len().saturating_sub(1));
            }
        }
    }

    let mut beta = beta_end.to_vec();
    let mut beta_prev = vec![0.0; s_n];
    for t in (0..steps).rev() {
        let g = &gamma[t * g_len..(t + 1) * g_len];
        let a = &alpha[t * s_n..(t + 1) * s_n];
        if t < n {
            let mk = &mut mvals[t * m..(t + 1) * m];
            mk.fill(f64::NEG_INFINITY);
            for s in 0..s_n {
                let mut bmax = f64::NEG_INFINITY;
                for (u, mu) in mk.iter_mut().enumerate() {
                    let (ns, gi) = lat.out[s * m + u];
                    let gb = g[gi] + beta[ns];
                    bmax = bmax.max(gb);
                    *mu = mu.max(a[s] + gb);
                }
                beta_prev[s] = bmax;
            }
            counters.add(2 * s_n * m, s_n * (m - 1) + m * (s_n - 1));
        } else {
            for s in 0..s_n {
                let (_, ns, gi) = lat.tail_out[s];
                beta_prev[s] = g[gi] + beta[ns];
            }
            counters.add(s_n, 0);
        }
        core::mem::swap(&mut beta, &mut beta_prev);
    }
}

#[inline]
fn forward_step(lat: &Lattice, a: &[f64], g: &[f64], a_next: &mut [f64]) {
    let m = lat.arity;
    for (ns, slot) in a_next.iter_mut().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for &(s, _, gi) in &lat.inc[ns * m..(ns + 1) * m] {
            best = best.max(a[s] + g[gi]);
        }
        *slot = best;
    }
}

/// Forward metrics at step 0 estimated by running over the last steps of the
/// block from a uniform start.
fn warm_alpha(
    lat: &Lattice,
    gamma: &[f64],
    range: core::ops::Range<usize>,
    counters: &mut OpCounters,
) -> Vec<f64> {
    let s_n = lat.states;
    let g_len = lat.gamma_len();
    let mut a = vec![0.0; s_n];
    let mut next = vec![0.0; s_n];
    for t in range {
        forward_step(lat, &a, &gamma[t * g_len..(t + 1) * g_len], &mut next);
        core::mem::swap(&mut a, &mut next);
        counters.add(s_n * lat.arity, s_n * (lat.arity - 1));
    }
    a
}

/// Backward metrics at step `n` estimated by running backward over the first
/// steps of the block from a uniform start.
fn warm_beta(
    lat: &Lattice,
    gamma: &[f64],
    range: core::ops::Range<usize>,
    counters: &mut OpCounters,
) -> Vec<f64> {
    let s_n = lat.states;
    let m = lat.arity;
    let g_len = lat.gamma_len();
    let mut b = vec![0.0; s_n];
    let mut prev = vec![0.0; s_n];
    for t in range.rev() {
        let g = &gamma[t * g_len..(t + 1) * g_len];
        for (s, slot) in prev.iter_mut().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for u in 0..m {
                let (ns, gi) = lat.out[s * m + u];
                best = best.max(g[gi] + b[ns]);
            }
            *slot = best;
        }
        core::mem::swap(&mut b, &mut prev);
        counters.add(s_n * m, s_n * (m - 1));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::Termination;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    struct Case {
        sys: Vec<f64>,
        par: Vec<f64>,
        apr: Vec<f64>,
        tail: Vec<f64>,
    }

    impl Case {
        fn random(t: &TrellisSpec, n: usize, tail: bool, seed: u64) -> Self {
            let mut rng = SmallRng::seed_from_u64(seed);
            let mut v = |len: usize| -> Vec<f64> {
                (0..len).map(|_| rng.random_range(-4.0..4.0)).collect()
            };
            let tl = if tail { t.tail_steps() * (t.bits_per_step() + t.parity_per_step()) } else { 0 };
            Case {
                sys: v(n * t.bits_per_step()),
                par: v(n * t.parity_per_step()),
                apr: v(n * (t.arity() - 1)),
                tail: v(tl),
            }
        }

        fn input(&self) -> SisoInput<'_> {
            SisoInput { systematic: &self.sys, parity: &self.par, apriori: &self.apr, tail: &self.tail }
        }
    }

    /// Brute force over every codeword: per step and symbol, the best
    /// correlation `sum(bit * LLR) + La` among codewords carrying that symbol.
    fn exhaustive(t: &TrellisSpec, case: &Case, n: usize, termination: Termination) -> Vec<f64> {
        let bps = t.bits_per_step();
        let m = t.arity();
        let pp = t.parity_per_step();
        let mut best = vec![f64::NEG_INFINITY; n * m];
        for word in 0..(1usize << (n * bps)) {
            let data: Vec<u8> = (0..n * bps).map(|i| (word >> (n * bps - 1 - i) & 1) as u8).collect();
            let start = match termination {
                Termination::TailBits => 0,
                Termination::Tailbiting => t.circulation_state(&data).unwrap(),
            };
            let enc = t.encode(&data, termination, start).unwrap();
            let mut metric = 0.0;
            for (i, &b) in enc.systematic.iter().enumerate() {
                metric += f64::from(b) * case.sys[i];
            }
            for k in 0..n {
                for j in 0..pp {
                    metric += f64::from(enc.parity[j][k]) * case.par[k * pp + j];
                }
                let u = t.pack_input(&data[k * bps..(k + 1) * bps]);
                if u > 0 {
                    metric += case.apr[k * (m - 1) + u - 1];
                }
            }
            for (i, &b) in enc.tail.iter().enumerate() {
                metric += f64::from(b) * case.tail[i];
            }
            for k in 0..n {
                let u = t.pack_input(&data[k * bps..(k + 1) * bps]);
                let slot = &mut best[k * m + u];
                *slot = slot.max(metric);
            }
        }
        let mut out = Vec::new();
        for k in 0..n {
            for u in 1..m {
                out.push(best[k * m + u] - best[k * m]);
            }
        }
        out
    }

    #[test]
    fn terminated_binary_matches_exhaustive_search() {
        let t = TrellisSpec::binary_rsc();
        for seed in 0..20 {
            let case = Case::random(&t, 10, true, seed);
            let (out, _) = max_log_map(&t, &case.input(), Boundary::Terminated).unwrap();
            let oracle = exhaustive(&t, &case, 10, Termination::TailBits);
            for (a, b) in out.values().iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_tailbiting_duobinary_matches_exhaustive_search() {
        let t = TrellisSpec::duobinary_rsc();
        for seed in 0..5 {
            let case = Case::random(&t, 6, false, seed);
            let (out, _) = max_log_map(&t, &case.input(), Boundary::TailbitingExact).unwrap();
            let oracle = exhaustive(&t, &case, 6, Termination::Tailbiting);
            for (a, b) in out.values().iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn warmup_tailbiting_recovers_clean_codeword() {
        let t = TrellisSpec::duobinary_rsc();
        let mut rng = SmallRng::seed_from_u64(3);
        let n = 48;
        let data: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2u8)).collect();
        let sc = t.circulation_state(&data).unwrap();
        let enc = t.encode(&data, Termination::Tailbiting, sc).unwrap();
        let llr = |b: u8| if b == 1 { 2.0 } else { -2.0 };
        let sys: Vec<f64> = enc.systematic.iter().map(|&b| llr(b)).collect();
        let par: Vec<f64> = (0..n).flat_map(|k| [llr(enc.parity[0][k]), llr(enc.parity[1][k])]).collect();
        let apr = vec![0.0; 3 * n];
        let input = SisoInput { systematic: &sys, parity: &par, apriori: &apr, tail: &[] };
        let (out, _) = max_log_map(&t, &input, Boundary::Tailbiting).unwrap();
        let hard = out.hard_symbols();
        for k in 0..n {
            assert_eq!(hard[k], t.pack_input(&data[2 * k..2 * k + 2]));
        }
    }

    #[test]
    fn output_scales_linearly_with_inputs() {
        let t = TrellisSpec::binary_rsc();
        let case = Case::random(&t, 40, true, 9);
        let (a, _) = max_log_map(&t, &case.input(), Boundary::Terminated).unwrap();
        let scaled = Case {
            sys: case.sys.iter().map(|x| 0.5 * x).collect(),
            par: case.par.iter().map(|x| 0.5 * x).collect(),
            apr: case.apr.iter().map(|x| 0.5 * x).collect(),
            tail: case.tail.iter().map(|x| 0.5 * x).collect(),
        };
        let (b, _) = max_log_map(&t, &scaled.input(), Boundary::Terminated).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((0.5 * x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn per_step_operation_counts() {
        // binary: 2 + 3 * 16 + 1 adds, 8 + 8 + 2 * 7 comparisons per step
        // duo-binary: 14 + 3 * 32 + 3 adds, 24 + 24 + 4 * 7 comparisons
        for (t, boundary, adds, cmps) in [
            (TrellisSpec::binary_rsc(), Boundary::Terminated, 51, 30),
            (TrellisSpec::duobinary_rsc(), Boundary::Tailbiting, 113, 76),
        ] {
            let tail = boundary == Boundary::Terminated;
            let c1 = max_log_map(&t, &Case::random(&t, 96, tail, 1).input(), boundary).unwrap().1;
            let c2 = max_log_map(&t, &Case::random(&t, 192, tail, 1).input(), boundary).unwrap().1;
            assert_eq!(c2.additions - c1.additions, 96 * adds);
            assert_eq!(c2.comparisons - c1.comparisons, 96 * cmps);
        }
    }
}

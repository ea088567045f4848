//! Soft-output Viterbi with symbol reliabilities.
//!
//! The add-compare-select keeps, for every state and step, the survivor and
//! the metric gap `delta` to each discarded branch. After tracing back the
//! maximum-likelihood path, every discarded branch that joins the path is
//! traced back along survivors for up to `update_depth` steps; wherever it
//! carries a symbol `v` different from the path, the reliability `R[v]` of
//! that step is lowered to `delta`. Output LLRs are `R[0] - R[v]` with the
//! path symbol's reliability taken as zero.

use super::{Boundary, Lattice, OpCounters, SisoAlgorithm, SisoDecoder, SisoInput, Workspace};
use crate::error::{unsupported, Result};
use crate::llr::SymbolLlrBlock;
use crate::trellis::TrellisSpec;

/// Update window used by [`SisoAlgorithm::sova`].
pub const DEFAULT_UPDATE_DEPTH: usize = 24;

/// Reliability of a symbol never contested within the update window.
pub const RELIABILITY_CEILING: f64 = 1.0e3;

/// Steps of cyclic extension on each side of a tailbiting block.
pub const TAILBITING_EXTENSION: usize = 24;

/// One SOVA pass. Returns the a-posteriori symbol LLRs and the operations
/// spent. Only [`Boundary::Terminated`] and [`Boundary::Tailbiting`] are
/// supported.
pub fn sova(
    trellis: &TrellisSpec,
    input: &SisoInput<'_>,
    boundary: Boundary,
    update_depth: usize,
) -> Result<(SymbolLlrBlock, OpCounters)> {
    let mut dec = SisoDecoder::new(trellis, SisoAlgorithm::Sova { update_depth });
    let out = dec.decode(trellis, input, boundary)?;
    Ok((out, dec.counters()))
}

#[allow(clippy::too_many_arguments)]
pub(super) fn run(
    lat: &Lattice,
    input: &SisoInput<'_>,
    n: usize,
    boundary: Boundary,
    depth: usize,
    work: &mut Workspace,
    counters: &mut OpCounters,
    out: &mut [f64],
) -> Result<()> {
    if depth == 0 {
        return Err(unsupported!("SOVA update depth must be positive"));
    }
    let s_n = lat.states;
    let m = lat.arity;
    let g_len = lat.gamma_len();
    let (steps, offset, tail) = match boundary {
        Boundary::Terminated => (n + lat.tail_steps, 0, lat.tail_steps),
        Boundary::Tailbiting => (n + 2 * TAILBITING_EXTENSION, TAILBITING_EXTENSION, 0),
        Boundary::TailbitingExact => {
            return Err(unsupported!("SOVA has no exact tailbiting mode"));
        }
    };
    lat.gamma_table(input, n, &mut work.gamma, counters);
    // trellis step -> row of the branch metric table
    let row = |t: usize| -> usize {
        if tail > 0 {
            t
        } else {
            (t + n - offset % n) % n
        }
    };
    let is_data = |t: usize| tail == 0 || t < n;

    // add-compare-select
    let pm = &mut work.metrics;
    pm.clear();
    pm.resize(2 * s_n, 0.0);
    if tail > 0 {
        pm[..s_n].fill(f64::NEG_INFINITY);
        pm[0] = 0.0;
    }
    let dec = &mut work.decisions;
    dec.clear();
    dec.resize(steps * s_n, 0);
    let deltas = &mut work.deltas;
    deltas.clear();
    deltas.resize(steps * s_n * m, f64::INFINITY);
    let mut cand = [0.0f64; 16];
    for t in 0..steps {
        let g = &work.gamma[row(t) * g_len..(row(t) + 1) * g_len];
        let (cur, next) = pm.split_at_mut(s_n);
        for ns in 0..s_n {
            let count = if is_data(t) {
                for (i, &(s, _, gi)) in lat.inc[ns * m..(ns + 1) * m].iter().enumerate() {
                    cand[i] = cur[s] + g[gi];
                }
                m
            } else {
                for (i, &(s, _, gi)) in lat.tail_in[ns].iter().enumerate() {
                    cand[i] = cur[s] + g[gi];
                }
                lat.tail_in[ns].len()
            };
            if count == 0 {
                next[ns] = f64::NEG_INFINITY;
                continue;
            }
            let mut best = 0;
            for i in 1..count {
                if cand[i] > cand[best] {
                    best = i;
                }
            }
            dec[t * s_n + ns] = best as u8;
            next[ns] = cand[best];
            let d = &mut deltas[(t * s_n + ns) * m..(t * s_n + ns + 1) * m];
            for i in 0..count {
                if i != best {
                    d[i] = cand[best] - cand[i];
                }
            }
            // a two-way compare yields the gap for free
            let gap_cost = if count > 2 { count - 1 } else { 0 };
            counters.add(count + gap_cost, count - 1);
        }
        cur.copy_from_slice(next);
    }

    // survivor traceback
    let branch = |t: usize, ns: usize, i: usize| -> (usize, usize) {
        if is_data(t) {
            let (s, u, _) = lat.inc[ns * m + i];
            (s, u)
        } else {
            let (s, u, _) = lat.tail_in[ns][i];
            (s, u)
        }
    };
    let end = if tail > 0 {
        0
    } else {
        counters.add(0, s_n - 1);
        let mut best = 0;
        for s in 1..s_n {
            if pm[s] > pm[best] {
                best = s;
            }
        }
        best
    };
    let path = &mut work.path;
    path.clear();
    path.resize(2 * steps + 1, 0);
    // path[t] = state before step t, path[steps + 1 + t] = input at step t
    path[steps] = end;
    for t in (0..steps).rev() {
        let ns = path[t + 1];
        let (s, u) = branch(t, ns, usize::from(dec[t * s_n + ns]));
        path[t] = s;
        path[steps + 1 + t] = u;
    }
    let ml_state = |t: usize| path[t];
    let ml_input = |t: usize| path[steps + 1 + t];

    // reliability updates
    let rel = &mut work.scratch;
    rel.clear();
    rel.resize(steps * m, RELIABILITY_CEILING);
    let mut mins = 0;
    for t in 0..steps {
        let ns = ml_state(t + 1);
        let surv = usize::from(dec[t * s_n + ns]);
        let count = if is_data(t) { m } else { lat.tail_in[ns].len() };
        for i in 0..count {
            if i == surv {
                continue;
            }
            let delta = deltas[(t * s_n + ns) * m + i];
            if delta >= f64::INFINITY || delta.is_nan() {
                continue;
            }
            let (mut cs, cu) = branch(t, ns, i);
            if cu != ml_input(t) {
                let r = &mut rel[t * m + cu];
                *r = r.min(delta);
                mins += 1;
            }
            let stop = (t + 1).saturating_sub(depth);
            let mut j = t;
            while j > stop {
                j -= 1;
                if cs == ml_state(j + 1) {
                    break;
                }
                let (ps, pu) = branch(j, cs, usize::from(dec[j * s_n + cs]));
                if pu != ml_input(j) {
                    let r = &mut rel[j * m + pu];
                    *r = r.min(delta);
                    mins += 1;
                }
                cs = ps;
            }
        }
    }
    counters.add(0, mins);

    for (k, o) in out.chunks_exact_mut(m - 1).enumerate() {
        let t = k + offset;
        let u_hat = ml_input(t);
        let r = |v: usize| if v == u_hat { 0.0 } else { rel[t * m + v] };
        for v in 1..m {
            o[v - 1] = r(0) - r(v);
        }
    }
    counters.add(n * (m - 1), 0);
    Ok(())
}

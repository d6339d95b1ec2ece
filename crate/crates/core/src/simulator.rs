//! Monte-Carlo simulation of the three-phase relay protocol with peeling
//! decoders at the relay and at the destination.
//!
//! The codes are linear and the channels are erasure channels, so the
//! all-zero codeword is sent; residual erasures do not depend on the
//! codeword.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::code_sampler::{assemble_overall, assemble_relay, syndrome_bits, CodeInstance};
use crate::error::SimError;
use crate::rng::derive_seed;
use crate::sparse::SparseBinaryMatrix;
use crate::theory::ChannelSet;

fn check_probability(name: &str, v: f64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SimError::Parameters(format!("{name} = {v} is not in [0, 1]")))
    }
}

/// I.i.d. Bernoulli(`p`) correlation indicators.
pub fn sample_correlation_vector(k: usize, p: f64, seed: u64) -> Result<Vec<u8>, SimError> {
    check_probability("p", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..k).map(|_| u8::from(rng.gen::<f64>() < p)).collect())
}

/// I.i.d. Bernoulli(`eps`) erasure mask. One uniform is drawn per position,
/// so masks for the same seed are nested in `eps`.
pub fn erase(n: usize, eps: f64, seed: u64) -> Result<Vec<bool>, SimError> {
    check_probability("eps", eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.gen::<f64>() < eps).collect())
}

/// Order in which solvable checks are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeelOrder {
    Fifo,
    /// Uniformly random pick among the pending checks.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelOutcome {
    /// All bit values after decoding; residual positions keep their input.
    pub values: Vec<u8>,
    /// Erased positions recovered, in recovery order.
    pub recovered: Vec<usize>,
    /// Positions still erased (sorted): the largest stopping set inside the
    /// erased set.
    pub residual: Vec<usize>,
}

/// Peeling decoder for `H x = rhs` with the positions in `erased` unknown.
pub fn peel(
    h: &SparseBinaryMatrix,
    erased: &[usize],
    values: &[u8],
    rhs: &[u8],
) -> Result<PeelOutcome, SimError> {
    peel_with_order(h, erased, values, rhs, PeelOrder::Fifo)
}

pub fn peel_with_order(
    h: &SparseBinaryMatrix,
    erased: &[usize],
    values: &[u8],
    rhs: &[u8],
    order: PeelOrder,
) -> Result<PeelOutcome, SimError> {
    TannerGraph::new(h).peel(&[], erased, values, rhs, order)
}

/// Row and column adjacency of a parity-check matrix in compressed form,
/// built once and reused across decoding runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    cols: usize,
    row_start: Vec<usize>,
    row_cols: Vec<usize>,
    col_start: Vec<usize>,
    col_rows: Vec<usize>,
}

impl TannerGraph {
    pub fn new(h: &SparseBinaryMatrix) -> Self {
        let cols = h.n_cols();
        let mut row_start = Vec::with_capacity(h.n_rows() + 1);
        let mut row_cols = Vec::with_capacity(h.nnz());
        row_start.push(0);
        for row in h.rows() {
            row_cols.extend_from_slice(row);
            row_start.push(row_cols.len());
        }
        let mut col_start = vec![0usize; cols + 1];
        for &c in &row_cols {
            col_start[c + 1] += 1;
        }
        for c in 0..cols {
            col_start[c + 1] += col_start[c];
        }
        let mut fill = col_start.clone();
        let mut col_rows = vec![0usize; row_cols.len()];
        for r in 0..h.n_rows() {
            for &c in &row_cols[row_start[r]..row_start[r + 1]] {
                col_rows[fill[c]] = r;
                fill[c] += 1;
            }
        }
        Self {
            cols,
            row_start,
            row_cols,
            col_start,
            col_rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    /// Peels `[H; E] x = rhs`, where `E` holds the weight-two rows `extra`
    /// (each column in at most one of them) and `rhs` covers the rows of `H`
    /// followed by those of `E`.
    pub fn peel(
        &self,
        extra: &[[usize; 2]],
        erased: &[usize],
        values: &[u8],
        rhs: &[u8],
        order: PeelOrder,
    ) -> Result<PeelOutcome, SimError> {
        let base_rows = self.n_rows();
        let rows = base_rows + extra.len();
        let cols = self.cols;
        if values.len() != cols || rhs.len() != rows {
            return Err(SimError::Parameters(format!(
                "{} values and {} right-hand sides for a {rows} x {cols} system",
                values.len(),
                rhs.len()
            )));
        }
        let mut extra_of = vec![usize::MAX; cols];
        for (i, pair) in extra.iter().enumerate() {
            for &c in pair {
                if c >= cols || extra_of[c] != usize::MAX || pair[0] == pair[1] {
                    return Err(SimError::Parameters(format!(
                        "extra row {i} is not a weight-two row on fresh columns"
                    )));
                }
                extra_of[c] = base_rows + i;
            }
        }
        let mut is_erased = vec![false; cols];
        for &e in erased {
            if e >= cols {
                return Err(SimError::Parameters(format!("erased index {e} >= {cols}")));
            }
            is_erased[e] = true;
        }
        let mut values: Vec<u8> = values.iter().map(|v| v & 1).collect();

        let mut count = vec![0u32; rows];
        let mut ids = vec![0usize; rows];
        let mut parity = vec![0u8; rows];
        let mut pending = Vec::new();
        for r in 0..rows {
            let row: &[usize] = if r < base_rows {
                &self.row_cols[self.row_start[r]..self.row_start[r + 1]]
            } else {
                &extra[r - base_rows]
            };
            parity[r] = rhs[r] & 1;
            for &c in row {
                if is_erased[c] {
                    count[r] += 1;
                    ids[r] ^= c;
                } else {
                    parity[r] ^= values[c];
                }
            }
            match count[r] {
                0 if parity[r] == 1 => return Err(SimError::Inconsistent { row: r }),
                1 => pending.push(r),
                _ => {}
            }
        }

        let mut rng = match order {
            PeelOrder::Fifo => None,
            PeelOrder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        let mut head = 0;
        let mut recovered = Vec::new();
        loop {
            let r = match rng.as_mut() {
                None => {
                    if head == pending.len() {
                        break;
                    }
                    head += 1;
                    pending[head - 1]
                }
                Some(rng) => {
                    if pending.is_empty() {
                        break;
                    }
                    let i = rng.gen_range(0..pending.len());
                    pending.swap_remove(i)
                }
            };
            if count[r] != 1 {
                continue;
            }
            let c = ids[r];
            let v = parity[r];
            values[c] = v;
            is_erased[c] = false;
            recovered.push(c);
            let touched = self.col_rows[self.col_start[c]..self.col_start[c + 1]]
                .iter()
                .copied()
                .chain((extra_of[c] != usize::MAX).then_some(extra_of[c]));
            for r2 in touched {
                count[r2] -= 1;
                ids[r2] ^= c;
                parity[r2] ^= v;
                match count[r2] {
                    0 if parity[r2] == 1 => return Err(SimError::Inconsistent { row: r2 }),
                    1 => pending.push(r2),
                    _ => {}
                }
            }
        }
        let residual = (0..cols).filter(|&c| is_erased[c]).collect();
        Ok(PeelOutcome {
            values,
            recovered,
            residual,
        })
    }
}

/// Decoding graphs of a code instance: the relay's `[H1 0; 0 H2]` and the
/// destination's `[H1 0; 0 H2; Hs1 Hs2]`; correlation rows are added per
/// block.
#[derive(Debug, Clone)]
pub struct PreparedInstance<'a> {
    pub inst: &'a CodeInstance,
    relay: TannerGraph,
    dest: TannerGraph,
}

impl<'a> PreparedInstance<'a> {
    pub fn new(inst: &'a CodeInstance) -> Result<Self, SimError> {
        let none = vec![0u8; inst.k()];
        let relay = assemble_relay(inst, &none)?;
        let (dest, _) = assemble_overall(inst, &none)?;
        Ok(Self {
            inst,
            relay: TannerGraph::new(&relay),
            dest: TannerGraph::new(&dest),
        })
    }

    fn correlation_pairs(&self, z: &[u8]) -> Result<Vec<[usize; 2]>, SimError> {
        let inst = self.inst;
        if z.len() != inst.k() {
            return Err(SimError::Parameters(format!(
                "correlation vector of length {} for k = {}",
                z.len(),
                inst.k()
            )));
        }
        let n1 = inst.n(0);
        Ok(z.iter()
            .enumerate()
            .filter(|(_, &b)| b & 1 == 1)
            .map(|(i, _)| [inst.systematic[0][i], n1 + inst.systematic[1][i]])
            .collect())
    }
}

/// Result of one simulated block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub relay_success: bool,
    /// Systematic bits of each user left erased at the destination; a relay
    /// failure counts as all `k` erased.
    pub residual: [usize; 2],
    pub k: usize,
}

/// Random draws of one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialInput {
    pub z: Vec<u8>,
    pub relay_erasures: [Vec<bool>; 2],
    pub dest_erasures: [Vec<bool>; 2],
}

/// Draws the correlation indicators and all four erasure masks of a block.
pub fn draw_trial_input(
    inst: &CodeInstance,
    channels: &ChannelSet,
    p: f64,
    seed: u64,
) -> Result<TrialInput, SimError> {
    let (n1, n2) = (inst.n(0), inst.n(1));
    Ok(TrialInput {
        z: sample_correlation_vector(inst.k(), p, derive_seed(seed, &[0]))?,
        relay_erasures: [
            erase(n1, channels.eps_s1r, derive_seed(seed, &[1, 0]))?,
            erase(n2, channels.eps_s2r, derive_seed(seed, &[1, 1]))?,
        ],
        dest_erasures: [
            erase(n1, channels.eps_s1d, derive_seed(seed, &[2, 0]))?,
            erase(n2, channels.eps_s2d, derive_seed(seed, &[2, 1]))?,
        ],
    })
}

/// Decoder-side detail of a block, for cross-checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialDetail {
    pub outcome: TrialOutcome,
    /// Destination residual over the concatenated columns of both users
    /// (empty when the relay failed).
    pub dest_residual: Vec<usize>,
    /// Destination bit values after decoding.
    pub dest_values: Vec<u8>,
}

fn erased_set(inst: &CodeInstance, masks: &[Vec<bool>; 2], punctured: bool) -> Vec<usize> {
    let n1 = inst.n(0);
    let mut erased = vec![false; n1 + inst.n(1)];
    for u in 0..2 {
        let offset = if u == 0 { 0 } else { n1 };
        for (c, &e) in masks[u].iter().enumerate() {
            erased[offset + c] = e;
        }
        if punctured {
            for &c in &inst.systematic[u] {
                erased[offset + c] = true;
            }
        }
    }
    (0..erased.len()).filter(|&c| erased[c]).collect()
}

/// Decodes one block. `codeword` is the transmitted pair (all zero when
/// `None`); it must satisfy the correlation constraints of `input.z`.
pub fn decode_trial(
    prep: &PreparedInstance<'_>,
    input: &TrialInput,
    codeword: Option<&[Vec<u8>; 2]>,
    punctured: bool,
) -> Result<TrialDetail, SimError> {
    let inst = prep.inst;
    let (n1, n2) = (inst.n(0), inst.n(1));
    let k = inst.k();
    let x: Vec<u8> = match codeword {
        Some([x1, x2]) => {
            if x1.len() != n1 || x2.len() != n2 {
                return Err(SimError::Parameters("codeword lengths do not match".into()));
            }
            x1.iter().chain(x2.iter()).copied().collect()
        }
        None => vec![0; n1 + n2],
    };
    let pairs = prep.correlation_pairs(&input.z)?;

    let relay_erased = erased_set(inst, &input.relay_erasures, punctured);
    let relay_rhs = vec![0; prep.relay.n_rows() + pairs.len()];
    let relay_out = prep
        .relay
        .peel(&pairs, &relay_erased, &x, &relay_rhs, PeelOrder::Fifo)?;
    if !relay_out.residual.is_empty() {
        return Ok(TrialDetail {
            outcome: TrialOutcome {
                relay_success: false,
                residual: [k, k],
                k,
            },
            dest_residual: Vec::new(),
            dest_values: Vec::new(),
        });
    }
    let decoded = relay_out.values;
    let s = syndrome_bits(&inst.hs[0], &inst.hs[1], &decoded[..n1], &decoded[n1..])?;

    let first = inst.h[0].n_rows() + inst.h[1].n_rows();
    let mut rhs = vec![0u8; prep.dest.n_rows() + pairs.len()];
    rhs[first..first + s.len()].copy_from_slice(&s);
    let dest_erased = erased_set(inst, &input.dest_erasures, punctured);
    let out = prep.dest.peel(&pairs, &dest_erased, &x, &rhs, PeelOrder::Fifo)?;
    let mut residual_mask = vec![false; n1 + n2];
    for &c in &out.residual {
        residual_mask[c] = true;
    }
    let residual = [
        inst.systematic[0].iter().filter(|&&c| residual_mask[c]).count(),
        inst.systematic[1].iter().filter(|&&c| residual_mask[n1 + c]).count(),
    ];
    Ok(TrialDetail {
        outcome: TrialOutcome {
            relay_success: true,
            residual,
            k,
        },
        dest_residual: out.residual,
        dest_values: out.values,
    })
}

/// One all-zero block: relay decoding, syndrome generation, destination
/// decoding.
pub fn run_trial(
    prep: &PreparedInstance<'_>,
    channels: &ChannelSet,
    p: f64,
    punctured: bool,
    seed: u64,
) -> Result<TrialOutcome, SimError> {
    let input = draw_trial_input(prep.inst, channels, p, seed)?;
    Ok(decode_trial(prep, &input, None, punctured)?.outcome)
}

/// Averages of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps_s1d: f64,
    pub eps_s2d: f64,
    pub eps_s1r: f64,
    pub eps_s2r: f64,
    pub p: f64,
    pub trials: usize,
    pub ber_u1: f64,
    pub ber_u2: f64,
    /// Fraction of blocks the relay failed to decode.
    pub relay_fail: f64,
}

/// Seed of trial `trial` at sweep point `point`.
pub fn trial_seed(seed: u64, point: usize, trial: usize) -> u64 {
    derive_seed(seed, &[point as u64, trial as u64])
}

/// Bit erasure rates over a list of channel points. Trials are independent
/// and summed exactly, so the result does not depend on the thread count.
pub fn ber_sweep(
    inst: &CodeInstance,
    points: &[ChannelSet],
    p: f64,
    trials: usize,
    seed: u64,
    punctured: bool,
) -> Result<Vec<SweepRow>, SimError> {
    if trials == 0 {
        return Err(SimError::Parameters("trials must be >= 1".into()));
    }
    let k = inst.k().max(1) as f64;
    let prep = PreparedInstance::new(inst)?;
    points
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let (r1, r2, fails) = (0..trials)
                .into_par_iter()
                .map(|t| {
                    run_trial(&prep, ch, p, punctured, trial_seed(seed, i, t)).map(|o| {
                        (
                            o.residual[0] as u64,
                            o.residual[1] as u64,
                            u64::from(!o.relay_success),
                        )
                    })
                })
                .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;
            let n = trials as f64;
            Ok(SweepRow {
                eps_s1d: ch.eps_s1d,
                eps_s2d: ch.eps_s2d,
                eps_s1r: ch.eps_s1r,
                eps_s2r: ch.eps_s2r,
                p,
                trials,
                ber_u1: r1 as f64 / (k * n),
                ber_u2: r2 as f64 / (k * n),
                relay_fail: fails as f64 / n,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "eps_s1d,eps_s2d,eps_s1r,eps_s2r,p,trials,ber_u1,ber_u2,relay_fail";

/// Writes a sweep as CSV: a `#` metadata line, the header, one line per point.
pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow], metadata: &str) -> io::Result<()> {
    writeln!(out, "# {metadata}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.eps_s1d, r.eps_s2d, r.eps_s1r, r.eps_s2r, r.p, r.trials, r.ber_u1, r.ber_u2, r.relay_fail
        )?;
    }
    Ok(())
}

/// Metadata line describing how a sweep was seeded.
pub fn sweep_metadata(inst: &CodeInstance, seed: u64, punctured: bool) -> String {
    format!(
        "instance_seed={} trial_seed=splitmix(seed={seed},point,trial) punctured={punctured} \
         relay_failure=all_erased codeword=all_zero socket_assignment=random_per_position",
        inst.seed
    )
}

//! Finite-length realizations of the bilayer ensemble.
//!
//! Variable node `j` of position `t` is column `t * M + j`. Check nodes live
//! at positions `0..L+w-1`; each position owns `M l / r` checks of `r`
//! sockets, and every edge of a variable at position `t` lands at a check
//! position uniformly distributed over `t..t+w`. The `M l` edges leaving a
//! position are spread evenly over the `w` offsets in random order, so every
//! interior position receives exactly `M l` edges and fills its sockets.
//! Inside a position the incoming edges occupy a uniformly random subset of
//! the sockets; checks near the chain ends are sparser or empty (empty
//! checks are dropped).

use num::integer::gcd;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::{BilayerEnsemble, Degrees};
use crate::error::{EnsembleError, MatrixError};
use crate::rng::derive_seed;
use crate::sparse::SparseBinaryMatrix;

/// Attempts at moving a repeated edge to another check before giving up.
const REDRAW_ATTEMPTS: usize = 10_000;

/// One group of variable nodes feeding a shared set of checks.
#[derive(Debug, Clone, Copy)]
struct Part {
    l: u32,
    r: u32,
    m: usize,
}

fn checks_per_position(part: Part) -> Result<usize, EnsembleError> {
    let total = part.m * part.l as usize;
    if total % part.r as usize != 0 {
        let step = part.r as usize / gcd(part.l as usize, part.r as usize);
        return Err(EnsembleError::Divisibility {
            m: part.m,
            l: part.l,
            r: part.r,
            suggested_m: part.m.div_ceil(step) * step,
        });
    }
    Ok(total / part.r as usize)
}

/// Samples checks shared by several groups of variables; check `i` of a
/// position has `r_g` sockets reserved for group `g`. Returns one matrix per
/// group, all with the same rows.
fn sample_shared(
    parts: &[Part],
    chain_length: usize,
    window: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SparseBinaryMatrix>, EnsembleError> {
    if chain_length == 0 || window == 0 {
        return Err(EnsembleError::Parameters("L and w must be positive".into()));
    }
    let base = checks_per_position(parts[0])?;
    for &p in &parts[1..] {
        if checks_per_position(p)? != base {
            return Err(EnsembleError::Alignment(
                (parts[0].m * parts[0].l as usize) as f64 / f64::from(parts[0].r),
                (p.m * p.l as usize) as f64 / f64::from(p.r),
            ));
        }
    }
    let positions = chain_length + window - 1;
    let mut rows: Vec<Vec<Vec<usize>>> = vec![Vec::new(); parts.len()];
    let mut incoming: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); positions]; parts.len()];

    for (g, part) in parts.iter().enumerate() {
        for t in 0..chain_length {
            let mut edges: Vec<usize> = (0..part.m)
                .flat_map(|j| std::iter::repeat(t * part.m + j).take(part.l as usize))
                .collect();
            edges.shuffle(rng);
            // a random rotation decides which offsets take the remainder
            let rot = rng.gen_range(0..window);
            for (i, v) in edges.into_iter().enumerate() {
                incoming[g][t + (i + rot) % window].push(v);
            }
        }
    }

    for c in 0..positions {
        let n_checks = parts
            .iter()
            .enumerate()
            .map(|(g, p)| incoming[g][c].len().div_ceil(p.r as usize))
            .fold(base, usize::max);
        let mut per_group: Vec<Vec<Vec<usize>>> = Vec::with_capacity(parts.len());
        for (g, part) in parts.iter().enumerate() {
            let r = part.r as usize;
            let mut slots: Vec<Option<usize>> = vec![None; n_checks * r];
            let mut order: Vec<usize> = (0..slots.len()).collect();
            order.shuffle(rng);
            for (&v, &s) in incoming[g][c].iter().zip(order.iter()) {
                slots[s] = Some(v);
            }
            resolve_repeats(&mut slots, r, rng)?;
            per_group.push(
                slots
                    .chunks(r)
                    .map(|chunk| chunk.iter().flatten().copied().collect())
                    .collect(),
            );
        }
        // keep a check if any group touches it
        for i in 0..n_checks {
            if per_group.iter().any(|checks| !checks[i].is_empty()) {
                for (g, checks) in per_group.iter_mut().enumerate() {
                    rows[g].push(std::mem::take(&mut checks[i]));
                }
            }
        }
    }

    parts
        .iter()
        .zip(rows)
        .map(|(p, r)| {
            SparseBinaryMatrix::new(chain_length * p.m, r)
                .map_err(|e: MatrixError| EnsembleError::Parameters(e.to_string()))
        })
        .collect()
}

/// Moves every repeated variable in a check to a slot of another check of
/// the same position, swapping with whatever occupies that slot.
fn resolve_repeats(
    slots: &mut [Option<usize>],
    r: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(), EnsembleError> {
    let n_checks = slots.len() / r;
    let holds = |slots: &[Option<usize>], check: usize, v: usize, skip: usize| {
        (check * r..(check + 1) * r).any(|s| s != skip && slots[s] == Some(v))
    };
    for s in 0..slots.len() {
        let Some(v) = slots[s] else { continue };
        let check = s / r;
        if !holds(slots, check, v, s) {
            continue;
        }
        if n_checks < 2 {
            return Err(EnsembleError::Parameters(
                "a variable needs two edges into a single check; increase M".into(),
            ));
        }
        let mut moved = false;
        for _ in 0..REDRAW_ATTEMPTS {
            let t = rng.gen_range(0..slots.len());
            let other = t / r;
            if other == check || holds(slots, other, v, usize::MAX) {
                continue;
            }
            if let Some(u) = slots[t] {
                if holds(slots, check, u, s) {
                    continue;
                }
            }
            slots.swap(s, t);
            moved = true;
            break;
        }
        if !moved {
            return Err(EnsembleError::Parameters(
                "could not separate repeated edges; increase M".into(),
            ));
        }
    }
    Ok(())
}

/// Samples a parity-check matrix of the terminated `(l, r, L, w)` ensemble
/// with `M` variable nodes per position.
pub fn sample_sc_matrix(
    l: u32,
    r: u32,
    chain_length: usize,
    window: usize,
    m: usize,
    seed: u64,
) -> Result<SparseBinaryMatrix, EnsembleError> {
    if l == 0 || r == 0 || m == 0 {
        return Err(EnsembleError::Parameters(format!(
            "need positive l, r, M, got ({l}, {r}, {m})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = sample_shared(&[Part { l, r, m }], chain_length, window, &mut rng)?;
    Ok(out.remove(0))
}

/// A sampled bilayer code.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeInstance {
    /// First-layer parity-check matrices.
    pub h: [SparseBinaryMatrix; 2],
    /// Syndrome-layer matrices; `hs[0]` and `hs[1]` share their rows.
    pub hs: [SparseBinaryMatrix; 2],
    /// Systematic columns of each user; entry `n` of both lists refers to
    /// source bit `n` and lies at the same position of the chain.
    pub systematic: [Vec<usize>; 2],
    pub m: [usize; 2],
    pub chain_length: usize,
    pub window: usize,
    pub seed: u64,
}

impl CodeInstance {
    /// Number of source bits per user.
    pub fn k(&self) -> usize {
        self.systematic[0].len()
    }

    pub fn n(&self, user: usize) -> usize {
        self.h[user].n_cols()
    }

    /// Chain position of column `col` of user `user`.
    pub fn position(&self, user: usize, col: usize) -> usize {
        col / self.m[user]
    }
}

/// Samples all four component matrices of a bilayer ensemble and the
/// systematic sets. Deterministic given `seed`.
pub fn sample_instance(ens: &BilayerEnsemble, seed: u64) -> Result<CodeInstance, EnsembleError> {
    ens.validate()?;
    let (len, w) = (ens.chain_length, ens.window);
    let mut h = Vec::with_capacity(2);
    for u in 0..2 {
        let Degrees { l, r } = ens.first[u];
        h.push(sample_sc_matrix(l, r, len, w, ens.m[u], derive_seed(seed, &[0, u as u64]))?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
    let hs = match (ens.synd[0].is_empty(), ens.synd[1].is_empty()) {
        (true, true) => [SparseBinaryMatrix::zeros(0, len * ens.m[0]), SparseBinaryMatrix::zeros(0, len * ens.m[1])],
        (false, false) => {
            let parts = [0, 1].map(|u| Part {
                l: ens.synd[u].l,
                r: ens.synd[u].r,
                m: ens.m[u],
            });
            let mut v = sample_shared(&parts, len, w, &mut rng)?;
            let b = v.pop().expect("two groups");
            let a = v.pop().expect("two groups");
            [a, b]
        }
        (false, true) | (true, false) => {
            let u = usize::from(ens.synd[0].is_empty());
            let part = Part {
                l: ens.synd[u].l,
                r: ens.synd[u].r,
                m: ens.m[u],
            };
            let only = sample_shared(&[part], len, w, &mut rng)?.remove(0);
            let empty = SparseBinaryMatrix::zeros(only.n_rows(), len * ens.m[1 - u]);
            if u == 0 {
                [only, empty]
            } else {
                [empty, only]
            }
        }
    };
    let h1 = h.pop().expect("two users");
    let h0 = h.pop().expect("two users");

    let k = (h0.n_cols().saturating_sub(h0.n_rows())).min(h1.n_cols().saturating_sub(h1.n_rows()));
    let systematic = systematic_sets(k, ens, &mut rng)?;
    Ok(CodeInstance {
        h: [h0, h1],
        hs,
        systematic,
        m: ens.m,
        chain_length: len,
        window: w,
        seed,
    })
}

/// `k` systematic columns per user, spread evenly over the positions with the
/// same per-position counts for both users.
fn systematic_sets(
    k: usize,
    ens: &BilayerEnsemble,
    rng: &mut ChaCha8Rng,
) -> Result<[Vec<usize>; 2], EnsembleError> {
    let len = ens.chain_length;
    let mut counts = vec![k / len; len];
    let mut extra: Vec<usize> = (0..len).collect();
    extra.shuffle(rng);
    for &t in extra.iter().take(k % len) {
        counts[t] += 1;
    }
    if counts.iter().any(|&c| c > ens.m[0].min(ens.m[1])) {
        return Err(EnsembleError::Parameters(
            "more systematic bits than variables at a position".into(),
        ));
    }
    let mut sets = [Vec::with_capacity(k), Vec::with_capacity(k)];
    for (t, &count) in counts.iter().enumerate() {
        for (u, set) in sets.iter_mut().enumerate() {
            let m = ens.m[u];
            let mut cols: Vec<usize> = rand::seq::index::sample(rng, m, count)
                .into_iter()
                .map(|j| t * m + j)
                .collect();
            cols.sort_unstable();
            set.extend(cols);
        }
    }
    Ok(sets)
}

/// What the right-hand side of a block of rows equals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsKind {
    Zero,
    /// The relay's syndrome bits, in order.
    Syndrome,
}

/// Row blocks of an assembled system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhsLayout {
    pub blocks: Vec<(std::ops::Range<usize>, RhsKind)>,
}

impl RhsLayout {
    /// Right-hand side with `syndrome` placed in the syndrome block.
    pub fn rhs(&self, syndrome: &[u8]) -> Result<Vec<u8>, MatrixError> {
        let rows = self.blocks.last().map_or(0, |(r, _)| r.end);
        let mut out = vec![0u8; rows];
        for (range, kind) in &self.blocks {
            if *kind == RhsKind::Syndrome {
                if syndrome.len() != range.len() {
                    return Err(MatrixError::Dimension(format!(
                        "syndrome of length {} for a block of {} rows",
                        syndrome.len(),
                        range.len()
                    )));
                }
                out[range.clone()].copy_from_slice(syndrome);
            }
        }
        Ok(out)
    }
}

fn correlation_rows(inst: &CodeInstance, z: &[u8]) -> Result<Vec<Vec<usize>>, MatrixError> {
    if z.len() != inst.k() {
        return Err(MatrixError::Dimension(format!(
            "correlation vector of length {} for k = {}",
            z.len(),
            inst.k()
        )));
    }
    let n1 = inst.n(0);
    Ok(z.iter()
        .enumerate()
        .filter(|(_, &b)| b & 1 == 1)
        .map(|(i, _)| vec![inst.systematic[0][i], n1 + inst.systematic[1][i]])
        .collect())
}

/// The destination's system `[H1 0; 0 H2; Hs1 Hs2; Hcorr]` over the
/// concatenated columns of both users. Correlation rows tie the `n`-th
/// systematic bits of the users wherever `z_n = 1`.
pub fn assemble_overall(
    inst: &CodeInstance,
    z: &[u8],
) -> Result<(SparseBinaryMatrix, RhsLayout), MatrixError> {
    let (n1, n2) = (inst.n(0), inst.n(1));
    let synd = SparseBinaryMatrix::hconcat(&inst.hs[0], &inst.hs[1])?;
    let mut m = SparseBinaryMatrix::stack(n1 + n2, &[(&inst.h[0], 0), (&inst.h[1], n1), (&synd, 0)])?;
    let first = inst.h[0].n_rows() + inst.h[1].n_rows();
    let synd_end = first + synd.n_rows();
    for row in correlation_rows(inst, z)? {
        m.push_row(row)?;
    }
    let layout = RhsLayout {
        blocks: vec![
            (0..first, RhsKind::Zero),
            (first..synd_end, RhsKind::Syndrome),
            (synd_end..m.n_rows(), RhsKind::Zero),
        ],
    };
    Ok((m, layout))
}

/// The relay's system `[H1 0; 0 H2; Hcorr]`.
pub fn assemble_relay(inst: &CodeInstance, z: &[u8]) -> Result<SparseBinaryMatrix, MatrixError> {
    let n1 = inst.n(0);
    let mut m = SparseBinaryMatrix::stack(n1 + inst.n(1), &[(&inst.h[0], 0), (&inst.h[1], n1)])?;
    for row in correlation_rows(inst, z)? {
        m.push_row(row)?;
    }
    Ok(m)
}

/// `Hs1 x1 + Hs2 x2` over GF(2).
pub fn syndrome_bits(
    hs1: &SparseBinaryMatrix,
    hs2: &SparseBinaryMatrix,
    x1: &[u8],
    x2: &[u8],
) -> Result<Vec<u8>, MatrixError> {
    if hs1.n_rows() != hs2.n_rows() {
        return Err(MatrixError::Dimension(format!(
            "syndrome matrices have {} and {} rows",
            hs1.n_rows(),
            hs2.n_rows()
        )));
    }
    let a = hs1.mul_vec(x1)?;
    let b = hs2.mul_vec(x2)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x ^ y).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_position_is_regular() {
        let h = sample_sc_matrix(2, 4, 1, 1, 4, 7).unwrap();
        assert_eq!(h.n_rows(), 2);
        assert_eq!(h.row_degrees(), vec![4, 4]);
        assert_eq!(h.column_degrees(), vec![2; 4]);
    }

    #[test]
    fn divisibility_error_suggests_m() {
        assert_eq!(
            sample_sc_matrix(3, 6, 10, 3, 5, 0),
            Err(EnsembleError::Divisibility {
                m: 5,
                l: 3,
                r: 6,
                suggested_m: 6
            })
        );
    }

    #[test]
    fn deterministic() {
        let a = sample_sc_matrix(3, 6, 20, 3, 60, 11).unwrap();
        let b = sample_sc_matrix(3, 6, 20, 3, 60, 11).unwrap();
        let c = sample_sc_matrix(3, 6, 20, 3, 60, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn syndrome_matrices_share_rows() {
        let ens = BilayerEnsemble::symmetric(4, 2, 8, 4, 10, 3, 16).unwrap();
        let inst = sample_instance(&ens, 5).unwrap();
        assert_eq!(inst.hs[0].n_rows(), inst.hs[1].n_rows());
        assert_eq!(inst.hs[0].column_degrees(), vec![2; 160]);
        assert_eq!(inst.hs[1].column_degrees(), vec![2; 160]);
        for (a, b) in inst.systematic[0].iter().zip(inst.systematic[1].iter()) {
            assert_eq!(inst.position(0, *a), inst.position(1, *b));
        }
    }
}

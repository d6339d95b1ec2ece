//! Dense linear algebra over GF(2) for small systems. Used to sample
//! codewords and to cross-check the peeling decoder.

use rand::Rng;

use crate::sparse::SparseBinaryMatrix;

/// Dense binary matrix with rows packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseGf2 {
    cols: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl DenseGf2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            cols,
            words,
            rows: vec![vec![0; words]; rows],
        }
    }

    pub fn from_sparse(m: &SparseBinaryMatrix) -> Self {
        let mut d = Self::zeros(m.n_rows(), m.n_cols());
        for (i, row) in m.rows().enumerate() {
            for &c in row {
                d.set(i, c, true);
            }
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let bit = 1u64 << (c % 64);
        if v {
            self.rows[r][c / 64] |= bit;
        } else {
            self.rows[r][c / 64] &= !bit;
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows.len() {
                break;
            }
            let Some(p) = (r..self.rows.len()).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r && row[c / 64] >> (c % 64) & 1 == 1 {
                    for (a, b) in row.iter_mut().zip(pivot.iter()) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().reduce().len()
    }

    /// A basis of the null space `{x : A x = 0}`.
    pub fn null_space(&self) -> Vec<Vec<u8>> {
        let mut m = self.clone();
        let pivots = m.reduce();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut x = vec![0u8; self.cols];
            x[free] = 1;
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, free) {
                    x[p] = 1;
                }
            }
            basis.push(x);
        }
        basis
    }

    /// A uniformly random solution of `A x = 0`.
    pub fn random_null_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let mut x = vec![0u8; self.cols];
        for b in self.null_space() {
            if rng.gen::<bool>() {
                for (xi, bi) in x.iter_mut().zip(b.iter()) {
                    *xi ^= bi;
                }
            }
        }
        x
    }
}

/// Erased positions that maximum-likelihood decoding determines, with their
/// values: solves `H_E x_E = H_K x_K + rhs` by elimination. Returns `None`
/// when the system is inconsistent.
pub fn ml_erasure_decode(
    h: &SparseBinaryMatrix,
    erased: &[usize],
    values: &[u8],
    rhs: &[u8],
) -> Option<Vec<(usize, u8)>> {
    let n = erased.len();
    let mut is_erased = vec![false; h.n_cols()];
    for &e in erased {
        is_erased[e] = true;
    }
    // augmented system [H_E | b]
    let mut a = DenseGf2::zeros(h.n_rows(), n + 1);
    let index: std::collections::HashMap<usize, usize> =
        erased.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    for (r, row) in h.rows().enumerate() {
        let mut b = rhs[r] & 1;
        for &c in row {
            if is_erased[c] {
                a.set(r, index[&c], true);
            } else {
                b ^= values[c] & 1;
            }
        }
        a.set(r, n, b == 1);
    }
    let pivots = a.reduce();
    if pivots.last() == Some(&n) {
        return None;
    }
    // a variable is determined iff its pivot row has no free-column entries
    let mut out = Vec::new();
    let is_pivot: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    for (r, &p) in pivots.iter().enumerate() {
        let determined = (0..n).all(|c| c == p || is_pivot.contains(&c) || !a.get(r, c));
        if determined {
            out.push((erased[p], u8::from(a.get(r, n))));
        }
    }
    out.sort_unstable();
    Some(out)
}

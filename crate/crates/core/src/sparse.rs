//! Sparse binary matrices stored as row adjacency lists.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::error::MatrixError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseBinaryMatrix {
    cols: usize,
    rows: Vec<Vec<usize>>,
}

impl SparseBinaryMatrix {
    /// Builds a matrix from row adjacency lists. Each row is sorted and
    /// repeated indices cancel in pairs, as entries of GF(2).
    pub fn new(cols: usize, rows: Vec<Vec<usize>>) -> Result<Self, MatrixError> {
        let mut out = Vec::with_capacity(rows.len());
        for mut row in rows {
            if let Some(&bad) = row.iter().find(|&&c| c >= cols) {
                return Err(MatrixError::IndexOutOfRange { index: bad, cols });
            }
            row.sort_unstable();
            let mut clean: Vec<usize> = Vec::with_capacity(row.len());
            for c in row {
                if clean.last() == Some(&c) {
                    clean.pop();
                } else {
                    clean.push(c);
                }
            }
            out.push(clean);
        }
        Ok(Self { cols, rows: out })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![Vec::new(); rows],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.cols];
        for row in &self.rows {
            for &c in row {
                deg[c] += 1;
            }
        }
        deg
    }

    /// For every column, the rows it appears in (ascending).
    pub fn column_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                adj[c].push(r);
            }
        }
        adj
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].binary_search(&col).is_ok()
    }

    /// `H x` over GF(2).
    pub fn mul_vec(&self, x: &[u8]) -> Result<Vec<u8>, MatrixError> {
        if x.len() != self.cols {
            return Err(MatrixError::Dimension(format!(
                "vector of length {} times matrix with {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1)))
            .collect())
    }

    /// Drops rows without entries.
    pub fn without_empty_rows(mut self) -> Self {
        self.rows.retain(|r| !r.is_empty());
        self
    }

    /// Stacks `blocks` on top of each other, shifting each block's columns
    /// by its offset; the result has `cols` columns.
    pub fn stack(cols: usize, blocks: &[(&SparseBinaryMatrix, usize)]) -> Result<Self, MatrixError> {
        let mut rows = Vec::new();
        for (m, offset) in blocks {
            if offset + m.cols > cols {
                return Err(MatrixError::Dimension(format!(
                    "block with {} columns at offset {offset} exceeds {cols} columns",
                    m.cols
                )));
            }
            rows.extend(m.rows.iter().map(|r| r.iter().map(|c| c + offset).collect::<Vec<_>>()));
        }
        Ok(Self { cols, rows })
    }

    /// Places two matrices with equal row counts side by side.
    pub fn hconcat(left: &SparseBinaryMatrix, right: &SparseBinaryMatrix) -> Result<Self, MatrixError> {
        if left.n_rows() != right.n_rows() {
            return Err(MatrixError::Dimension(format!(
                "row counts differ: {} vs {}",
                left.n_rows(),
                right.n_rows()
            )));
        }
        let rows = left
            .rows
            .iter()
            .zip(right.rows.iter())
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|c| c + left.cols)).collect())
            .collect();
        Ok(Self {
            cols: left.cols + right.cols,
            rows,
        })
    }

    /// Appends a row; indices must be in range.
    pub fn push_row(&mut self, row: Vec<usize>) -> Result<(), MatrixError> {
        let m = Self::new(self.cols, vec![row])?;
        self.rows.extend(m.rows);
        Ok(())
    }

    /// Dense 0/1 rows, for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0u8; self.cols];
                for &c in row {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }

    /// Text dump: a `rows cols` header, then one line of space-separated
    /// column indices per row.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.n_rows(), self.cols)?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{c}");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn dump_to_string(&self) -> String {
        let mut buf = Vec::new();
        self.dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    /// Parses the format written by [`dump`](Self::dump).
    pub fn parse(text: &str) -> Result<Self, MatrixError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(MatrixError::Parse {
            line: 1,
            reason: "missing header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| MatrixError::Parse {
                line: 1,
                reason: format!("bad header: {e}"),
            })?;
        let [n_rows, cols] = dims[..] else {
            return Err(MatrixError::Parse {
                line: 1,
                reason: "header must be `rows cols`".into(),
            });
        };
        let mut rows = Vec::with_capacity(n_rows);
        for (i, line) in lines.enumerate() {
            if rows.len() == n_rows {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(MatrixError::Parse {
                    line: i + 2,
                    reason: format!("more than {n_rows} rows"),
                });
            }
            let row: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| MatrixError::Parse {
                    line: i + 2,
                    reason: format!("bad column index: {e}"),
                })?;
            rows.push(row);
        }
        if rows.len() != n_rows {
            return Err(MatrixError::Parse {
                line: rows.len() + 2,
                reason: format!("expected {n_rows} rows, found {}", rows.len()),
            });
        }
        Self::new(cols, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_cancel() {
        let m = SparseBinaryMatrix::new(4, vec![vec![3, 1, 1, 0, 1], vec![2, 2]]).unwrap();
        assert_eq!(m.row(0), &[0, 1, 3]);
        assert!(m.row(1).is_empty());
        assert_eq!(m.without_empty_rows().n_rows(), 1);
    }

    #[test]
    fn out_of_range() {
        assert_eq!(
            SparseBinaryMatrix::new(3, vec![vec![3]]),
            Err(MatrixError::IndexOutOfRange { index: 3, cols: 3 })
        );
    }

    #[test]
    fn dump_round_trip() {
        let m = SparseBinaryMatrix::new(5, vec![vec![0, 4], vec![], vec![1, 2, 3]]).unwrap();
        let text = m.dump_to_string();
        assert_eq!(text, "3 5\n0 4\n\n1 2 3\n");
        assert_eq!(SparseBinaryMatrix::parse(&text).unwrap(), m);
        assert!(matches!(
            SparseBinaryMatrix::parse("2 5\n0 x\n"),
            Err(MatrixError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            SparseBinaryMatrix::parse("2 5\n0 1\n"),
            Err(MatrixError::Parse { .. })
        ));
    }

    #[test]
    fn products_and_blocks() {
        let a = SparseBinaryMatrix::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let b = SparseBinaryMatrix::new(2, vec![vec![0], vec![0, 1]]).unwrap();
        assert_eq!(a.mul_vec(&[1, 1, 0]).unwrap(), vec![0, 1]);
        assert!(a.mul_vec(&[1]).is_err());
        let h = SparseBinaryMatrix::hconcat(&a, &b).unwrap();
        assert_eq!(h.row(1), &[1, 2, 3, 4]);
        let s = SparseBinaryMatrix::stack(5, &[(&a, 0), (&b, 3)]).unwrap();
        assert_eq!(s.n_rows(), 4);
        assert_eq!(s.row(3), &[3, 4]);
        assert_eq!(s.column_degrees(), vec![1, 2, 1, 2, 1]);
        assert!(SparseBinaryMatrix::stack(4, &[(&b, 3)]).is_err());
    }
}

//! Compressed sparse row matrices.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::dense::Mat;

/// CSR matrix with strictly increasing column indices in each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMat {
    pub fn empty(nrows: usize, ncols: usize) -> Self {
        SparseMat {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from per-row `(column, value)` lists. Duplicate columns in a
    /// row are summed, explicit zeros are kept.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let start = col_idx.len();
            for (c, v) in row {
                assert!(c < ncols, "column {c} out of range {ncols}");
                if col_idx.len() > start && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMat {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); nrows];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        SparseMat::from_rows(ncols, rows)
    }

    pub fn from_dense(a: &Mat) -> Self {
        let rows = (0..a.rows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        SparseMat::from_rows(a.cols(), rows)
    }

    pub fn identity(n: usize) -> Self {
        SparseMat::from_rows(n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    /// Entry `(i, j)` or zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum();
        }
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// Rows `rows` and columns `cols` (half-open ranges) as a new matrix.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> SparseMat {
        let out = rows
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .filter(|(c, _)| cols.contains(c))
                    .map(|(&c, &v)| (c - cols.start, v))
                    .collect()
            })
            .collect();
        SparseMat::from_rows(cols.end - cols.start, out)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `diag(r) * A * diag(c)`.
    pub fn scaled(&self, r: &[f64], c: &[f64]) -> SparseMat {
        assert_eq!(r.len(), self.nrows);
        assert_eq!(c.len(), self.ncols);
        let mut out = self.clone();
        for i in 0..self.nrows {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for k in a..b {
                out.values[k] *= r[i] * c[self.col_idx[k]];
            }
        }
        out
    }

    /// Largest magnitude in each row.
    pub fn row_max_abs(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Largest magnitude in each column.
    pub fn col_max_abs(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.ncols];
        for (c, v) in self.col_idx.iter().zip(&self.values) {
            out[*c] = out[*c].max(v.abs());
        }
        out
    }

    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (c, v) in self.col_idx.iter().zip(&self.values) {
            sums[*c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Checks the CSR structural invariant.
    pub fn is_well_formed(&self) -> bool {
        (0..self.nrows).all(|i| {
            let (cols, _) = self.row(i);
            cols.windows(2).all(|w| w[0] < w[1]) && cols.iter().all(|&c| c < self.ncols)
        })
    }

    /// Write the nonzeros as `row col value` lines.
    pub fn write_coo<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(w, "{i} {c} {v:e}")?;
            }
        }
        Ok(())
    }

    /// Stack matrices with equal column counts vertically.
    pub fn vstack(parts: &[&SparseMat]) -> Result<SparseMat> {
        let ncols = parts.first().map_or(0, |p| p.ncols);
        let mut rows = Vec::new();
        for p in parts {
            if p.ncols != ncols {
                return Err(Error::Dimension(format!(
                    "vstack column mismatch {} vs {}",
                    p.ncols, ncols
                )));
            }
            for i in 0..p.nrows {
                let (c, v) = p.row(i);
                rows.push(c.iter().copied().zip(v.iter().copied()).collect());
            }
        }
        Ok(SparseMat::from_rows(ncols, rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_multiply() {
        let a = SparseMat::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (1, 1, 3.0), (1, 1, 1.0)]);
        assert!(a.is_well_formed());
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 1), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn block_extraction() {
        let d = Mat::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 3.0, 4.0],
            vec![5.0, 0.0, 6.0],
        ]);
        let a = SparseMat::from_dense(&d);
        let b = a.block(1..3, 1..3);
        assert_eq!(b.to_dense(), Mat::from_rows(&[vec![3.0, 4.0], vec![0.0, 6.0]]));
        assert_eq!(a.diagonal(), vec![1.0, 3.0, 6.0]);
        assert_eq!(a.col_max_abs(), vec![5.0, 3.0, 6.0]);
    }

    #[test]
    fn coo_dump() {
        let a = SparseMat::from_triplets(2, 2, &[(0, 1, 0.5), (1, 0, -2.0)]);
        let mut buf = Vec::new();
        a.write_coo(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 2);
        assert!(s.starts_with("0 1 5e-1"));
    }
}

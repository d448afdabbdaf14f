//! Row-major dense matrices and partial-pivoted LU.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed LU factors `P A = L U` with unit lower triangle.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Mat,
    perm: Vec<usize>,
}

/// Factor a square matrix with partial pivoting.
///
/// A pivot that is exactly zero, or below `1e-16` times the largest
/// matrix entry, is reported as singular.
pub fn lu_factor(mut a: Mat) -> Result<LuFactors> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::Dimension(format!(
            "LU needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 || best <= 1e-16 * scale {
            return Err(Error::Singular { step: k, pivot: best });
        }
        if p != k {
            perm.swap(p, k);
            let (lo, hi) = a.data.split_at_mut(p * n);
            lo[k * n..(k + 1) * n].swap_with_slice(&mut hi[..n]);
        }
        let pivot = a[(k, k)];
        let (top, bottom) = a.data.split_at_mut((k + 1) * n);
        let krow = &top[k * n..(k + 1) * n];
        for row in bottom.chunks_exact_mut(n) {
            let f = row[k] / pivot;
            row[k] = f;
            if f != 0.0 {
                for (r, u) in row[k + 1..].iter_mut().zip(&krow[k + 1..]) {
                    *r -= f * u;
                }
            }
        }
    }
    Ok(LuFactors { lu: a, perm })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solve `A x = b` for one right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solve for every column of `b`.
    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let n = self.dim();
        assert_eq!(b.rows(), n);
        let p = b.cols();
        let mut x = Mat::zeros(n, p);
        for (i, &src) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(src));
        }
        // Forward substitution, row-oriented so the inner loops stay contiguous.
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == 0.0 {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(i * p);
                for (xi, xk) in tail[..p].iter_mut().zip(&head[k * p..(k + 1) * p]) {
                    *xi -= l * xk;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u == 0.0 {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(k * p);
                for (xi, xk) in head[i * p..(i + 1) * p].iter_mut().zip(&tail[..p]) {
                    *xi -= u * xk;
                }
            }
            let d = self.lu[(i, i)];
            for v in x.row_mut(i) {
                *v /= d;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_solve() {
        let f = lu_factor(Mat::identity(4)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn permutation_needs_pivoting() {
        let a = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let f = lu_factor(a).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0]), vec![2.0, 1.0]);
    }

    #[test]
    fn singular_detected() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(lu_factor(a), Err(Error::Singular { .. })));
        assert!(lu_factor(Mat::zeros(3, 2)).is_err());
    }

    #[test]
    fn random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_factor(a.clone()).unwrap().solve(&b);
        let r = a.matvec(&x);
        let res = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * a.norm_fro() * xn, "residual {res}");
    }

    #[test]
    fn multi_rhs_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let b = Mat::from_fn(n, 3, |_, _| rng.gen_range(-1.0..1.0));
        let f = lu_factor(a).unwrap();
        let x = f.solve_mat(&b);
        for j in 0..3 {
            let xj = f.solve(&b.col(j));
            for i in 0..n {
                assert!((x[(i, j)] - xj[i]).abs() < 1e-12);
            }
        }
    }
}

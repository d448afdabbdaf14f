//! Ruiz equilibration and the diagonal approximate-Schur preconditioner.

use crate::error::{Error, Result};
use crate::linalg::gmres::Preconditioner;
use crate::linalg::sparse::SparseMat;

/// Result of equilibrating `A` into `B = diag(row) * A * diag(col)`.
#[derive(Debug, Clone)]
pub struct Equilibrated {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub matrix: SparseMat,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 20;
const TARGET: f64 = 0.1;

/// Ruiz scaling: alternately divide rows and columns by the square root of
/// their max magnitude until every row and column max lies within
/// `[0.9, 1.1]`, or 20 sweeps have run.
pub fn equilibrate(a: &SparseMat) -> Result<Equilibrated> {
    let (nr, nc) = (a.nrows(), a.ncols());
    let mut row = vec![1.0; nr];
    let mut col = vec![1.0; nc];
    let mut b = a.clone();
    if let Some(i) = b.row_max_abs().iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroLine { what: "row", index: i });
    }
    if let Some(j) = b.col_max_abs().iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroLine { what: "column", index: j });
    }
    let mut sweeps = 0;
    loop {
        let rmax = b.row_max_abs();
        let cmax = b.col_max_abs();
        let off = rmax
            .iter()
            .chain(&cmax)
            .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        if off <= TARGET || sweeps == MAX_SWEEPS {
            break;
        }
        let dr: Vec<f64> = rmax.iter().map(|v| 1.0 / v.sqrt()).collect();
        let dc: Vec<f64> = cmax.iter().map(|v| 1.0 / v.sqrt()).collect();
        b = b.scaled(&dr, &dc);
        row.iter_mut().zip(&dr).for_each(|(r, d)| *r *= d);
        col.iter_mut().zip(&dc).for_each(|(c, d)| *c *= d);
        sweeps += 1;
    }
    Ok(Equilibrated {
        row,
        col,
        matrix: b,
        sweeps,
    })
}

impl Equilibrated {
    /// Recover the original matrix.
    pub fn unscale(&self) -> SparseMat {
        let ri: Vec<f64> = self.row.iter().map(|v| 1.0 / v).collect();
        let ci: Vec<f64> = self.col.iter().map(|v| 1.0 / v).collect();
        self.matrix.scaled(&ri, &ci)
    }
}

/// Inverse of `P = diag(diag(A11), diag(A22 - A21 diag(A11)^-1 A12))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePrecond {
    pub inv_diag: Vec<f64>,
}

impl SaddlePrecond {
    /// Build from a square matrix partitioned after its first `n1` rows
    /// and columns; the trailing block has size `n2`.
    pub fn build(b: &SparseMat, n1: usize, n2: usize) -> Result<Self> {
        let n = n1 + n2;
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::Dimension(format!(
                "preconditioner blocks {n1}+{n2} vs matrix {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        let mut diag = Vec::with_capacity(n);
        for i in 0..n1 {
            diag.push(b.get(i, i));
        }
        for i in n1..n {
            let mut s = b.get(i, i);
            let (cols, vals) = b.row(i);
            for (&k, &a21) in cols.iter().zip(vals) {
                if k >= n1 {
                    break;
                }
                let a12 = b.get(k, i);
                if a12 != 0.0 {
                    s -= a21 * a12 / diag[k];
                }
            }
            diag.push(s);
        }
        if let Some(i) = diag.iter().position(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::ZeroDiagonal(i));
        }
        Ok(SaddlePrecond {
            inv_diag: diag.into_iter().map(|v| 1.0 / v).collect(),
        })
    }
}

impl Preconditioner for SaddlePrecond {
    fn apply(&self, x: &mut [f64]) {
        x.iter_mut().zip(&self.inv_diag).for_each(|(v, d)| *v *= d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::Mat;
    use crate::linalg::gmres::gmres;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, seed: u64) -> SparseMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10f64.powf(rng.gen_range(-4.0..4.0))));
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                t.push((i, j, rng.gen_range(-1.0..1.0) * 10f64.powf(rng.gen_range(-3.0..3.0))));
            }
        }
        SparseMat::from_triplets(n, n, &t)
    }

    #[test]
    fn balanced_matrix_untouched() {
        let a = SparseMat::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 0.5), (1, 1, -1.0)]);
        let e = equilibrate(&a).unwrap();
        assert_eq!(e.sweeps, 0);
        assert!(e.row.iter().chain(&e.col).all(|&v| v == 1.0));
    }

    #[test]
    fn extreme_diagonal() {
        let a = SparseMat::from_triplets(2, 2, &[(0, 0, 1e6), (1, 1, -1e-6)]);
        let e = equilibrate(&a).unwrap();
        assert!((e.matrix.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((e.matrix.get(1, 1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_sparse_norms_in_band() {
        for seed in 0..5 {
            let a = random_sparse(200, seed);
            let e = equilibrate(&a).unwrap();
            for v in e.matrix.row_max_abs().iter().chain(&e.matrix.col_max_abs()) {
                assert!((0.5..=2.0).contains(v), "max {v}");
            }
            let back = e.unscale();
            for i in 0..a.nrows() {
                let (c, v) = a.row(i);
                for (&j, &x) in c.iter().zip(v) {
                    assert!((back.get(i, j) - x).abs() <= 1e-12 * x.abs());
                }
            }
        }
    }

    #[test]
    fn zero_row_rejected() {
        let a = SparseMat::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        assert!(matches!(equilibrate(&a), Err(Error::ZeroLine { what: "row", index: 1 })));
    }

    #[test]
    fn block_diagonal_gives_exact_inverse() {
        let a = SparseMat::from_triplets(4, 4, &[(0, 0, 2.0), (1, 1, 4.0), (2, 2, -5.0), (3, 3, 0.5)]);
        let p = SaddlePrecond::build(&a, 2, 2).unwrap();
        assert_eq!(p.inv_diag, vec![0.5, 0.25, -0.2, 2.0]);
        let out = gmres(&a, &[1.0, 2.0, 3.0, 4.0], &[0.0; 4], 1e-12, 10, &p).unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn no_coupling_uses_a22_diagonal() {
        let a = SparseMat::from_triplets(3, 3, &[(0, 0, 2.0), (0, 2, 7.0), (1, 1, 3.0), (2, 2, 4.0)]);
        let p = SaddlePrecond::build(&a, 2, 1).unwrap();
        assert_eq!(p.inv_diag[2], 0.25);
    }

    #[test]
    fn schur_diagonal_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n1, n2) = (6, 3);
        let n = n1 + n2;
        let d = Mat::from_fn(n, n, |i, j| {
            if i == j {
                3.0 + rng.gen_range(0.0..1.0)
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let p = SaddlePrecond::build(&SparseMat::from_dense(&d), n1, n2).unwrap();
        for i in 0..n2 {
            let r = n1 + i;
            let mut s = d[(r, r)];
            for k in 0..n1 {
                s -= d[(r, k)] * d[(k, r)] / d[(k, k)];
            }
            assert!((1.0 / p.inv_diag[r] - s).abs() < 1e-12);
        }
        for i in 0..n1 {
            assert_eq!(p.inv_diag[i], 1.0 / d[(i, i)]);
        }
    }

    #[test]
    fn zero_diagonal_rejected() {
        let a = SparseMat::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(SaddlePrecond::build(&a, 1, 1), Err(Error::ZeroDiagonal(1))));
    }

    #[test]
    fn application_is_linear() {
        let p = SaddlePrecond {
            inv_diag: vec![0.3, -2.0, 7.5],
        };
        let x = [1.0, 2.0, 3.0];
        let y = [-0.5, 0.25, 4.0];
        let mut sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let (mut px, mut py) = (x.to_vec(), y.to_vec());
        p.apply(&mut sum);
        p.apply(&mut px);
        p.apply(&mut py);
        for i in 0..3 {
            assert!((sum[i] - (px[i] + py[i])).abs() <= 1e-15 * sum[i].abs().max(1.0));
        }
    }
}

//! Left-preconditioned, unrestarted GMRES.

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMat;

/// Something that can be applied as `y = A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMat {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

/// In-place preconditioner application `x <- M x`.
pub trait Preconditioner {
    fn apply(&self, x: &mut [f64]);
}

/// No preconditioning.
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, _x: &mut [f64]) {}
}

#[derive(Debug, Clone)]
pub struct GmresOutput {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final preconditioned residual relative to `|M b|`.
    pub residual: f64,
    /// Preconditioned residual norm after each iteration, starting with the
    /// initial residual.
    pub history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` starting from `x0`.
///
/// Converged when `|M (b - A x)| <= tol * |M b|`. On failure after
/// `maxit` iterations the error carries the best iterate.
pub fn gmres<A, P>(a: &A, b: &[f64], x0: &[f64], tol: f64, maxit: usize, precond: &P) -> Result<GmresOutput>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::Dimension(format!(
            "gmres: operator {n}, rhs {}, guess {}",
            b.len(),
            x0.len()
        )));
    }
    let mut mb = b.to_vec();
    precond.apply(&mut mb);
    let bnorm = norm(&mb);
    let mut x = x0.to_vec();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresOutput {
            x,
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }
    let target = tol * bnorm;

    let mut r = vec![0.0; n];
    a.apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    precond.apply(&mut r);
    let beta = norm(&r);
    let mut history = vec![beta];
    if beta <= target {
        return Ok(GmresOutput {
            x,
            iterations: 0,
            residual: beta / bnorm,
            history,
        });
    }

    let kmax = maxit.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    basis.push(r.iter().map(|v| v / beta).collect());
    // Hessenberg columns, rotated into upper triangular form as we go.
    let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut cs: Vec<f64> = Vec::with_capacity(kmax);
    let mut sn: Vec<f64> = Vec::with_capacity(kmax);
    let mut g = vec![beta];
    let mut w = vec![0.0; n];
    let mut k = 0;
    let mut resid = beta;

    while k < kmax {
        a.apply(&basis[k], &mut w);
        precond.apply(&mut w);
        let mut h = vec![0.0; k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(&w, v);
            h[i] = hij;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hij * vi;
            }
        }
        let hnext = norm(&w);
        h[k + 1] = hnext;

        for i in 0..k {
            let t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        let denom = h[k].hypot(h[k + 1]);
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[k] / denom, h[k + 1] / denom) };
        cs.push(c);
        sn.push(s);
        h[k] = c * h[k] + s * h[k + 1];
        h[k + 1] = 0.0;
        g.push(-s * g[k]);
        g[k] *= c;
        hcols.push(h);
        k += 1;
        resid = g[k].abs();
        history.push(resid);

        if resid <= target || hnext == 0.0 {
            break;
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }

    // Back substitution on the k x k triangle.
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= hcols[j][i] * y[j];
        }
        y[i] = s / hcols[i][i];
    }
    for (j, yj) in y.iter().enumerate() {
        for (xi, vi) in x.iter_mut().zip(&basis[j]) {
            *xi += yj * vi;
        }
    }

    if resid <= target {
        Ok(GmresOutput {
            x,
            iterations: k,
            residual: resid / bnorm,
            history,
        })
    } else {
        // Recompute the true preconditioned residual for the report.
        a.apply(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        precond.apply(&mut r);
        let true_res = norm(&r) / bnorm;
        if true_res <= tol {
            return Ok(GmresOutput {
                x,
                iterations: k,
                residual: true_res,
                history,
            });
        }
        Err(Error::NoConvergence {
            iterations: k,
            residual: true_res,
            best: x,
        })
    }
}

//! Local augmented PHS systems, weights and stability indicators.

use crate::error::{Error, Result};
use crate::linalg::dense::{lu_factor, LuFactors, Mat};
use crate::point::Point;
use crate::weights::basis::{eval_poly, phs, phs_grad, phs_lap, poly_terms, Frame};

/// Linear functional applied at an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    Eval,
    Laplacian,
    /// `alpha * n . grad + beta`.
    Robin { alpha: f64, beta: f64, normal: Point },
}

/// Kernel and polynomial blocks of one stencil with the factored saddle
/// matrix `[[A, Psi], [Psi^T, 0]]`.
///
/// Both blocks live in the scaled frame; `A` is `|s_i - s_j|^m` in scaled
/// coordinates, i.e. the physical kernel divided by `rho^m`.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub center_id: usize,
    pub coords: Vec<Point>,
    pub scaled: Vec<Point>,
    pub frame: Frame,
    pub ell: u32,
    pub m: u32,
    pub terms: Vec<(usize, usize)>,
    pub a: Mat,
    pub psi: Mat,
    lu: LuFactors,
}

/// Weights for `p` evaluation targets.
#[derive(Debug, Clone)]
pub struct Weights {
    /// `n x p`; column `j` holds the stencil weights for target `j`.
    pub w: Mat,
    /// `M x p` polynomial multipliers.
    pub wpsi: Mat,
    pub rhs_a: Mat,
    pub rhs_psi: Mat,
}

impl Weights {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.w.col(j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorResult {
    pub lebesgue: Vec<f64>,
    pub oscillation: Vec<f64>,
    pub accepted: Vec<bool>,
}

/// Numerical rank of `m` by complete-pivot elimination; pivots below
/// `1e-12` times the first pivot count as zero.
fn numerical_rank(m: &Mat) -> usize {
    let (r, c) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut rows: Vec<usize> = (0..r).collect();
    let mut cols: Vec<usize> = (0..c).collect();
    let mut first = 0.0;
    for k in 0..r.min(c) {
        let (mut bi, mut bj, mut best) = (k, k, 0.0f64);
        for i in k..r {
            for j in k..c {
                let v = a[(rows[i], cols[j])].abs();
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if k == 0 {
            first = best;
        }
        if best == 0.0 || best < 1e-12 * first {
            return k;
        }
        rows.swap(k, bi);
        cols.swap(k, bj);
        let (pr, pc) = (rows[k], cols[k]);
        let piv = a[(pr, pc)];
        for &ri in &rows[k + 1..] {
            let f = a[(ri, pc)] / piv;
            if f != 0.0 {
                for &cj in &cols[k..] {
                    let t = a[(pr, cj)];
                    a[(ri, cj)] -= f * t;
                }
            }
        }
    }
    r.min(c)
}

impl LocalSystem {
    /// Build and factor the saddle matrix for stencil points `coords`
    /// (center first). `center_id` is only used in error reports.
    pub fn assemble(coords: &[Point], center_id: usize, ell: u32, m: u32) -> Result<LocalSystem> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::Stencil {
                center: center_id,
                reason: "empty stencil".into(),
            });
        }
        let frame = Frame::new(coords, coords[0]);
        let scaled: Vec<Point> = coords.iter().map(|p| frame.scaled(*p)).collect();
        for i in 0..n {
            for j in i + 1..n {
                if scaled[i].dist_sq(scaled[j]) == 0.0 {
                    return Err(Error::Stencil {
                        center: center_id,
                        reason: format!("stencil points {i} and {j} coincide"),
                    });
                }
            }
        }
        let terms = poly_terms(ell);
        let mdim = terms.len();
        let a = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { phs(scaled[i].dist(scaled[j]), m) });
        let mut psi = Mat::zeros(n, mdim);
        for (i, s) in scaled.iter().enumerate() {
            let e = eval_poly(&frame, &terms, ell, *s);
            psi.row_mut(i).copy_from_slice(&e.value);
        }
        let rank = numerical_rank(&psi);
        if rank < mdim {
            return Err(Error::RankDeficient {
                center: center_id,
                rank,
                expected: mdim,
            });
        }
        let size = n + mdim;
        let mut full = Mat::zeros(size, size);
        for i in 0..n {
            full.row_mut(i)[..n].copy_from_slice(a.row(i));
            for k in 0..mdim {
                full[(i, n + k)] = psi[(i, k)];
                full[(n + k, i)] = psi[(i, k)];
            }
        }
        let lu = lu_factor(full).map_err(|e| Error::Stencil {
            center: center_id,
            reason: e.to_string(),
        })?;
        Ok(LocalSystem {
            center_id,
            coords: coords.to_vec(),
            scaled,
            frame,
            ell,
            m,
            terms,
            a,
            psi,
            lu,
        })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn poly_dim(&self) -> usize {
        self.terms.len()
    }

    /// Operator applied to every kernel column and polynomial at each target.
    pub fn operator_rhs(&self, targets: &[(Point, Functional)]) -> (Mat, Mat) {
        let n = self.n();
        let mdim = self.poly_dim();
        let rho = self.frame.rho;
        let mut ra = Mat::zeros(n, targets.len());
        let mut rp = Mat::zeros(mdim, targets.len());
        for (j, &(y, f)) in targets.iter().enumerate() {
            let s = self.frame.scaled(y);
            let pe = eval_poly(&self.frame, &self.terms, self.ell, s);
            for i in 0..n {
                let c = self.scaled[i];
                ra[(i, j)] = match f {
                    Functional::Eval => phs(s.dist(c), self.m),
                    Functional::Laplacian => phs_lap(s, c, self.m) / (rho * rho),
                    Functional::Robin { alpha, beta, normal } => {
                        alpha * normal.dot(phs_grad(s, c, self.m)) / rho + beta * phs(s.dist(c), self.m)
                    }
                };
            }
            for k in 0..mdim {
                rp[(k, j)] = match f {
                    Functional::Eval => pe.value[k],
                    Functional::Laplacian => pe.lap[k] / (rho * rho),
                    Functional::Robin { alpha, beta, normal } => {
                        alpha * normal.dot(pe.grad[k]) / rho + beta * pe.value[k]
                    }
                };
            }
        }
        (ra, rp)
    }

    /// Weights for each target. Plain evaluation exactly at a stencil node
    /// yields the cardinal vector.
    pub fn solve_weights(&self, targets: &[(Point, Functional)]) -> Weights {
        let n = self.n();
        let mdim = self.poly_dim();
        let (rhs_a, rhs_psi) = self.operator_rhs(targets);
        let p = targets.len();
        let mut rhs = Mat::zeros(n + mdim, p);
        for j in 0..p {
            for i in 0..n {
                rhs[(i, j)] = rhs_a[(i, j)];
            }
            for k in 0..mdim {
                rhs[(n + k, j)] = rhs_psi[(k, j)];
            }
        }
        let sol = self.lu.solve_mat(&rhs);
        let mut w = Mat::from_fn(n, p, |i, j| sol[(i, j)]);
        let mut wpsi = Mat::from_fn(mdim, p, |k, j| sol[(n + k, j)]);
        for (j, &(y, f)) in targets.iter().enumerate() {
            if f == Functional::Eval {
                if let Some(hit) = self.coords.iter().position(|c| *c == y) {
                    for i in 0..n {
                        w[(i, j)] = if i == hit { 1.0 } else { 0.0 };
                    }
                    for k in 0..mdim {
                        wpsi[(k, j)] = 0.0;
                    }
                }
            }
        }
        Weights { w, wpsi, rhs_a, rhs_psi }
    }

    /// Interpolation coefficients `[c; d]` for nodal `values`.
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        let mut rhs = values.to_vec();
        rhs.resize(self.n() + self.poly_dim(), 0.0);
        self.lu.solve(&rhs)
    }

    /// Evaluate the interpolant with coefficients from
    /// [`LocalSystem::coefficients`] at `y`.
    pub fn evaluate(&self, coefs: &[f64], y: Point) -> f64 {
        let n = self.n();
        let s = self.frame.scaled(y);
        let mut v = 0.0;
        for i in 0..n {
            v += coefs[i] * phs(s.dist(self.scaled[i]), self.m);
        }
        let pe = eval_poly(&self.frame, &self.terms, self.ell, s);
        for (k, pv) in pe.value.iter().enumerate() {
            v += coefs[n + k] * pv;
        }
        v
    }
}

/// Lebesgue and oscillation indicators for every target column, and the
/// accepted set relative to column `center`.
pub fn indicators(w: &Weights, center: usize) -> IndicatorResult {
    let p = w.w.cols();
    let mut lebesgue = vec![0.0; p];
    let mut oscillation = vec![0.0; p];
    for j in 0..p {
        let mut l = 0.0;
        let mut s = 0.0;
        for i in 0..w.w.rows() {
            l += w.w[(i, j)].abs();
            s += w.w[(i, j)] * w.rhs_a[(i, j)];
        }
        for k in 0..w.wpsi.rows() {
            s += w.wpsi[(k, j)] * w.rhs_psi[(k, j)];
        }
        lebesgue[j] = l;
        oscillation[j] = s.abs();
    }
    let (lc, oc) = (lebesgue[center], oscillation[center]);
    let accepted = (0..p)
        .map(|j| j == center || (lebesgue[j] <= lc && oscillation[j] <= oc))
        .collect();
    IndicatorResult {
        lebesgue,
        oscillation,
        accepted,
    }
}

/// Sufficient eigenvalue condition `2 w[0] >= -|w|_1`.
pub fn center_condition(w: &[f64]) -> bool {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    2.0 * w.first().copied().unwrap_or(0.0) >= -l1
}

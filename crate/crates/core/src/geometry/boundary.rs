//! Closed curves reconstructed from seed points by periodic PHS
//! interpolation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::dense::{lu_factor, Mat};
use crate::point::Point;

/// Degree of the periodic PHS kernel.
pub const KERNEL_DEGREE: u32 = 7;
/// Highest trigonometric degree in the augmentation.
const TRIG_DEGREE: usize = 3;
const TRIG_TERMS: usize = 2 * TRIG_DEGREE + 1;
/// Fewest seeds accepted by [`fit_boundary`].
pub const MIN_SEEDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
}

/// Periodic interpolant `mu -> (x(mu), y(mu))` through the seeds at
/// `mu_j = 2 pi j / K`.
#[derive(Debug, Clone)]
pub struct ParametricBoundary {
    pub seeds: Vec<Point>,
    pub params: Vec<f64>,
    pub kernel_degree: u32,
    /// Kernel coefficients followed by trigonometric coefficients.
    coef_x: Vec<f64>,
    coef_y: Vec<f64>,
    pub orientation: Orientation,
}

/// `(2 |sin(d/2)|)^7` and its first two derivatives in `d`.
fn kernel(d: f64) -> [f64; 3] {
    let s = (0.5 * d).sin();
    let c = (0.5 * d).cos();
    let a = s.abs();
    let a5 = a.powi(5);
    [128.0 * a5 * a * a, 448.0 * a5 * s * c, 448.0 * a5 * (3.0 * c * c - 0.5 * s * s)]
}

/// `1, cos mu, sin mu, cos 2mu, ...` with derivatives.
fn trig(mu: f64) -> [[f64; TRIG_TERMS]; 3] {
    let mut out = [[0.0; TRIG_TERMS]; 3];
    out[0][0] = 1.0;
    for k in 1..=TRIG_DEGREE {
        let kf = k as f64;
        let (s, c) = (kf * mu).sin_cos();
        out[0][2 * k - 1] = c;
        out[0][2 * k] = s;
        out[1][2 * k - 1] = -kf * s;
        out[1][2 * k] = kf * c;
        out[2][2 * k - 1] = -kf * kf * c;
        out[2][2 * k] = -kf * kf * s;
    }
    out
}

/// Fit a closed curve through `seeds` (in curve order).
pub fn fit_boundary(seeds: &[Point]) -> Result<ParametricBoundary> {
    let k = seeds.len();
    if k < MIN_SEEDS {
        return Err(Error::BoundaryFit(format!("need at least {MIN_SEEDS} seeds, got {k}")));
    }
    let params: Vec<f64> = (0..k).map(|j| 2.0 * PI * j as f64 / k as f64).collect();
    let size = k + TRIG_TERMS;
    let mut a = Mat::zeros(size, size);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = kernel(params[i] - params[j])[0];
        }
        let t = trig(params[i]);
        for (q, v) in t[0].iter().enumerate() {
            a[(i, k + q)] = *v;
            a[(k + q, i)] = *v;
        }
    }
    let lu = lu_factor(a).map_err(|e| Error::BoundaryFit(e.to_string()))?;
    let mut bx: Vec<f64> = seeds.iter().map(|p| p.x).collect();
    let mut by: Vec<f64> = seeds.iter().map(|p| p.y).collect();
    bx.resize(size, 0.0);
    by.resize(size, 0.0);
    let coef_x = lu.solve(&bx);
    let coef_y = lu.solve(&by);
    let mut area = 0.0;
    for i in 0..k {
        let (p, q) = (seeds[i], seeds[(i + 1) % k]);
        area += p.x * q.y - q.x * p.y;
    }
    if area == 0.0 {
        return Err(Error::BoundaryFit("seeds enclose no area".into()));
    }
    for i in 0..k {
        for j in i + 1..k {
            if seeds[i] == seeds[j] {
                return Err(Error::BoundaryFit(format!("seeds {i} and {j} coincide")));
            }
        }
    }
    Ok(ParametricBoundary {
        seeds: seeds.to_vec(),
        params,
        kernel_degree: KERNEL_DEGREE,
        coef_x,
        coef_y,
        orientation: if area > 0.0 { Orientation::Ccw } else { Orientation::Cw },
    })
}

impl ParametricBoundary {
    /// Position and first two derivatives at `mu`.
    pub fn eval_derivs(&self, mu: f64) -> [Point; 3] {
        let k = self.seeds.len();
        let mut out = [Point::ZERO; 3];
        for j in 0..k {
            let kv = kernel(mu - self.params[j]);
            for d in 0..3 {
                out[d] += Point::new(self.coef_x[j] * kv[d], self.coef_y[j] * kv[d]);
            }
        }
        let t = trig(mu);
        for q in 0..TRIG_TERMS {
            for d in 0..3 {
                out[d] += Point::new(self.coef_x[k + q] * t[d][q], self.coef_y[k + q] * t[d][q]);
            }
        }
        out
    }

    pub fn point(&self, mu: f64) -> Point {
        self.eval_derivs(mu)[0]
    }

    pub fn tangent(&self, mu: f64) -> Point {
        self.eval_derivs(mu)[1]
    }

    /// Unit normal pointing away from the region the curve encloses.
    pub fn normal(&self, mu: f64) -> Result<Point> {
        let t = self.tangent(mu);
        let len = t.norm();
        if len == 0.0 || !len.is_finite() {
            return Err(Error::BoundaryFit(format!("zero tangent at mu = {mu}")));
        }
        let n = (1.0 / len) * t.perp_cw();
        Ok(match self.orientation {
            Orientation::Ccw => n,
            Orientation::Cw => -n,
        })
    }

    pub fn normals(&self, mus: &[f64]) -> Result<Vec<Point>> {
        mus.iter().map(|&m| self.normal(m)).collect()
    }

    /// `count` points equally spaced in the parameter.
    pub fn sample(&self, count: usize) -> Vec<(f64, Point)> {
        (0..count)
            .map(|i| {
                let mu = 2.0 * PI * i as f64 / count as f64;
                (mu, self.point(mu))
            })
            .collect()
    }

    /// Cumulative arc length table on `count` uniform parameter samples
    /// (trapezoid rule on the speed), with the total length last.
    fn arc_table(&self, count: usize) -> Vec<f64> {
        let speed: Vec<f64> = (0..=count)
            .map(|i| self.tangent(2.0 * PI * i as f64 / count as f64).norm())
            .collect();
        let dm = 2.0 * PI / count as f64;
        let mut acc = vec![0.0; count + 1];
        for i in 0..count {
            acc[i + 1] = acc[i] + 0.5 * dm * (speed[i] + speed[i + 1]);
        }
        acc
    }

    pub fn length(&self) -> f64 {
        *self.arc_table(64 * self.seeds.len()).last().unwrap()
    }

    /// Parameters of `count` points equally spaced in arc length, starting
    /// at `mu = 0`.
    pub fn equal_arc_params(&self, count: usize) -> Vec<f64> {
        let m = 64 * self.seeds.len();
        let table = self.arc_table(m);
        let total = table[m];
        let dm = 2.0 * PI / m as f64;
        (0..count)
            .map(|i| {
                let target = total * i as f64 / count as f64;
                let seg = table.partition_point(|&v| v <= target).clamp(1, m) - 1;
                let frac = (target - table[seg]) / (table[seg + 1] - table[seg]);
                dm * (seg as f64 + frac)
            })
            .collect()
    }

    /// Parameter of the point on the curve nearest `p`: best of `samples`
    /// uniform samples, then Gauss-Newton refinement.
    pub fn nearest_param(&self, p: Point, samples: &[(f64, Point)]) -> f64 {
        let mut best = samples
            .iter()
            .min_by(|a, b| a.1.dist_sq(p).total_cmp(&b.1.dist_sq(p)))
            .map(|s| s.0)
            .unwrap_or(0.0);
        let step = 2.0 * PI / samples.len().max(1) as f64;
        for _ in 0..20 {
            let [c, d1, d2] = self.eval_derivs(best);
            let r = c - p;
            let g = r.dot(d1);
            let hss = d1.norm_sq() + r.dot(d2);
            let hss = if hss > 0.0 { hss } else { d1.norm_sq() };
            let delta = (g / hss).clamp(-step, step);
            best -= delta;
            if delta.abs() < 1e-15 {
                break;
            }
        }
        best.rem_euclid(2.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse(k: usize, a: f64, b: f64, c: Point) -> Vec<Point> {
        (0..k)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / k as f64;
                c + Point::new(a * t.cos(), b * t.sin())
            })
            .collect()
    }

    #[test]
    fn interpolates_and_closes() {
        let seeds = ellipse(20, 0.4, 0.2, Point::new(0.0, -0.5));
        let b = fit_boundary(&seeds).unwrap();
        for (j, s) in seeds.iter().enumerate() {
            assert!(b.point(b.params[j]).dist(*s) <= 1e-10);
        }
        assert!(b.point(0.0).dist(Point::new(0.4, -0.5)) <= 1e-10);
        for mu in [0.3, 1.7, 4.4] {
            assert!(b.point(mu).dist(b.point(mu + 2.0 * PI)) <= 1e-12);
        }
    }

    #[test]
    fn circle_accuracy() {
        let b = fit_boundary(&ellipse(20, 1.0, 1.0, Point::ZERO)).unwrap();
        for (_, p) in b.sample(200) {
            assert!((p.norm() - 1.0).abs() <= 1e-6);
        }
        for j in 0..20 {
            let n = b.normal(b.params[j]).unwrap();
            assert!(n.dist(b.seeds[j]) <= 1e-5);
            assert!((n.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn reversed_seeds_flip_orientation() {
        let seeds = ellipse(16, 0.1, 0.2, Point::ZERO);
        let mut rev = seeds.clone();
        rev.reverse();
        let a = fit_boundary(&seeds).unwrap();
        let b = fit_boundary(&rev).unwrap();
        assert_eq!(a.orientation, Orientation::Ccw);
        assert_eq!(b.orientation, Orientation::Cw);
        // Outward normals agree regardless of traversal direction.
        let na = a.normal(0.0).unwrap();
        let nb = b.normal(b.params[15]).unwrap();
        assert!(na.dist(Point::new(1.0, 0.0)) < 1e-6);
        assert!(nb.dist(Point::new(1.0, 0.0)) < 1e-6);
    }

    #[test]
    fn e2_normal_at_zero() {
        let b = fit_boundary(&ellipse(20, 0.1, 0.2, Point::ZERO)).unwrap();
        assert!(b.normal(0.0).unwrap().dist(Point::new(1.0, 0.0)) < 1e-9);
    }

    #[test]
    fn too_few_or_coincident() {
        assert!(fit_boundary(&ellipse(7, 1.0, 1.0, Point::ZERO)).is_err());
        let mut s = ellipse(10, 1.0, 1.0, Point::ZERO);
        s[3] = s[2];
        assert!(fit_boundary(&s).is_err());
    }

    #[test]
    fn arc_length_spacing() {
        let b = fit_boundary(&ellipse(20, 0.4, 0.2, Point::new(0.0, -0.5))).unwrap();
        let len = b.length();
        let count = 40;
        let mus = b.equal_arc_params(count);
        assert_eq!(mus[0], 0.0);
        for i in 0..count {
            let d = b.point(mus[i]).dist(b.point(mus[(i + 1) % count]));
            assert!((d - len / count as f64).abs() < 0.02 * len / count as f64);
        }
    }

    /// Seeds equally spaced in arc length on an ellipse, so the uniform
    /// parameter assignment is not the ellipse's own parametrization.
    fn arc_seeds(k: usize) -> Vec<Point> {
        let m = 20000;
        let f = |t: f64| Point::new(0.4 * t.cos(), 0.2 * t.sin());
        let mut acc = vec![0.0];
        for i in 0..m {
            let t0 = 2.0 * PI * i as f64 / m as f64;
            let t1 = 2.0 * PI * (i + 1) as f64 / m as f64;
            acc.push(acc[i] + f(t0).dist(f(t1)));
        }
        let total = acc[m];
        (0..k)
            .map(|j| {
                let target = total * j as f64 / k as f64;
                let i = acc.partition_point(|&v| v <= target) - 1;
                f(2.0 * PI * i as f64 / m as f64)
            })
            .collect()
    }

    fn ellipse_error(b: &ParametricBoundary) -> f64 {
        b.sample(400)
            .iter()
            .map(|(_, p)| ((p.x / 0.4).powi(2) + (p.y / 0.2).powi(2) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn error_decreases_with_seed_count() {
        let mut prev = f64::INFINITY;
        for k in [16, 32, 64] {
            let e = ellipse_error(&fit_boundary(&arc_seeds(k)).unwrap());
            assert!(e < prev, "k={k}: {e} vs {prev}");
            prev = e;
        }
    }

    #[test]
    fn nearest_param_projects() {
        let b = fit_boundary(&ellipse(20, 1.0, 1.0, Point::ZERO)).unwrap();
        let samples = b.sample(100);
        let p = Point::new(0.3, 0.4);
        let mu = b.nearest_param(p, &samples);
        let q = b.point(mu);
        assert!(q.dist(p.normalized()) < 1e-6);
    }
}

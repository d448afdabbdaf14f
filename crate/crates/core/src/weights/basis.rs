//! PHS kernel and scaled Legendre polynomial basis with analytic
//! derivatives, all in stencil-local coordinates.

use crate::point::Point;

/// Local frame of a stencil: `s = (x - center) / rho`, and the box of the
/// scaled stencil coordinates mapped to `[-1, 1]^2` for the polynomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub center: Point,
    pub rho: f64,
    /// `u = ax * s.x + bx`, `v = ay * s.y + by`.
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
}

impl Frame {
    pub fn new(coords: &[Point], center: Point) -> Frame {
        let rho = coords.iter().map(|p| p.dist(center)).fold(0.0, f64::max);
        let rho = if rho > 0.0 { rho } else { 1.0 };
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in coords {
            let s = (1.0 / rho) * (*p - center);
            lo = Point::new(lo.x.min(s.x), lo.y.min(s.y));
            hi = Point::new(hi.x.max(s.x), hi.y.max(s.y));
        }
        let map = |lo: f64, hi: f64| {
            let w = hi - lo;
            if w > 0.0 {
                (2.0 / w, -(hi + lo) / w)
            } else {
                (1.0, -lo)
            }
        };
        let (ax, bx) = map(lo.x, hi.x);
        let (ay, by) = map(lo.y, hi.y);
        Frame { center, rho, ax, bx, ay, by }
    }

    #[inline]
    pub fn scaled(&self, p: Point) -> Point {
        (1.0 / self.rho) * (p - self.center)
    }
}

/// Exponent pairs `(a, b)` of the products `P_a(u) P_b(v)`, graded by total
/// degree: `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
pub fn poly_terms(ell: u32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in 0..=ell as usize {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Legendre values, first and second derivatives for degrees `0..=deg`.
pub fn legendre(deg: usize, t: f64) -> [Vec<f64>; 3] {
    let mut p = vec![0.0; deg + 1];
    let mut dp = vec![0.0; deg + 1];
    let mut ddp = vec![0.0; deg + 1];
    p[0] = 1.0;
    if deg >= 1 {
        p[1] = t;
        dp[1] = 1.0;
    }
    for k in 1..deg {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * t * p[k] - kf * p[k - 1]) / (kf + 1.0);
        dp[k + 1] = dp[k - 1] + (2.0 * kf + 1.0) * p[k];
        ddp[k + 1] = ddp[k - 1] + (2.0 * kf + 1.0) * dp[k];
    }
    [p, dp, ddp]
}

/// Value, scaled-gradient and scaled-Laplacian of every basis polynomial at
/// scaled point `s`.
pub struct PolyEval {
    pub value: Vec<f64>,
    pub grad: Vec<Point>,
    pub lap: Vec<f64>,
}

pub fn eval_poly(frame: &Frame, terms: &[(usize, usize)], ell: u32, s: Point) -> PolyEval {
    let u = frame.ax * s.x + frame.bx;
    let v = frame.ay * s.y + frame.by;
    let [pu, dpu, ddpu] = legendre(ell as usize, u);
    let [pv, dpv, ddpv] = legendre(ell as usize, v);
    let mut value = Vec::with_capacity(terms.len());
    let mut grad = Vec::with_capacity(terms.len());
    let mut lap = Vec::with_capacity(terms.len());
    for &(a, b) in terms {
        value.push(pu[a] * pv[b]);
        grad.push(Point::new(frame.ax * dpu[a] * pv[b], frame.ay * pu[a] * dpv[b]));
        lap.push(frame.ax * frame.ax * ddpu[a] * pv[b] + frame.ay * frame.ay * pu[a] * ddpv[b]);
    }
    PolyEval { value, grad, lap }
}

/// `r^m`.
#[inline]
pub fn phs(r: f64, m: u32) -> f64 {
    r.powi(m as i32)
}

/// Gradient of `|s - c|^m` with respect to `s`.
#[inline]
pub fn phs_grad(s: Point, c: Point, m: u32) -> Point {
    let d = s - c;
    let r = d.norm();
    if r == 0.0 {
        return Point::ZERO;
    }
    (m as f64 * r.powi(m as i32 - 2)) * d
}

/// 2D Laplacian of `|s - c|^m`.
#[inline]
pub fn phs_lap(s: Point, c: Point, m: u32) -> f64 {
    let r = s.dist(c);
    if r == 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    mf * mf * r.powi(m as i32 - 2)
}

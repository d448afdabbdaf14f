//! Unit disk with moving embedded boundaries: classification, node
//! adaptation and seed advection.

use crate::error::{Error, Result};
use crate::geometry::boundary::{fit_boundary, ParametricBoundary, MIN_SEEDS};
use crate::geometry::nodes::{NodeSet, Role};
use crate::point::Point;

/// Interior nodes closer than this multiple of `h` to an embedded boundary
/// are deactivated.
pub const CULL_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

/// An embedded boundary together with the samples used for projection.
#[derive(Debug, Clone)]
pub struct Embedded {
    pub curve: ParametricBoundary,
    samples: Vec<(f64, Point)>,
    lo: Point,
    hi: Point,
}

impl Embedded {
    pub fn new(curve: ParametricBoundary) -> Embedded {
        let samples = curve.sample(32 * curve.seeds.len());
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (_, p) in &samples {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Embedded { curve, samples, lo, hi }
    }

    /// Distance to the curve, positive outside the region it encloses and
    /// negative inside. Zero means on the curve.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let mu = self.curve.nearest_param(p, &self.samples);
        let b = self.curve.point(mu);
        let n = match self.curve.normal(mu) {
            Ok(n) => n,
            Err(_) => return 0.0,
        };
        let d = p.dist(b);
        let s = (p - b).dot(n);
        if s > 0.0 {
            d
        } else if s < 0.0 {
            -d
        } else {
            0.0
        }
    }

    /// Lower bound on the distance from `p` to the curve's bounding box.
    fn box_distance(&self, p: Point) -> f64 {
        let dx = (self.lo.x - p.x).max(p.x - self.hi.x).max(0.0);
        let dy = (self.lo.y - p.y).max(p.y - self.hi.y).max(0.0);
        dx.hypot(dy)
    }
}

/// `Omega(t) = unit disk minus the regions enclosed by the embedded curves`.
#[derive(Debug, Clone)]
pub struct DomainModel {
    pub embedded: Vec<Embedded>,
    pub t: f64,
}

impl DomainModel {
    pub fn new(curves: Vec<ParametricBoundary>, t: f64) -> DomainModel {
        DomainModel {
            embedded: curves.into_iter().map(Embedded::new).collect(),
            t,
        }
    }

    pub fn from_seeds(seeds: &[Vec<Point>], t: f64) -> Result<DomainModel> {
        let curves = seeds.iter().map(|s| fit_boundary(s)).collect::<Result<Vec<_>>>()?;
        Ok(DomainModel::new(curves, t))
    }

    pub fn disk() -> DomainModel {
        DomainModel::new(Vec::new(), 0.0)
    }

    pub fn seeds(&self) -> Vec<Vec<Point>> {
        self.embedded.iter().map(|e| e.curve.seeds.clone()).collect()
    }

    /// Smallest signed distance to any embedded curve, or infinity.
    /// Curves whose box lies farther than `cutoff` are skipped.
    pub fn embedded_distance(&self, p: Point, cutoff: f64) -> f64 {
        let mut best = f64::INFINITY;
        for e in &self.embedded {
            if e.box_distance(p) > cutoff {
                continue;
            }
            best = best.min(e.signed_distance(p));
        }
        best
    }
}

/// Whether `p` lies strictly inside `Omega(t)`. Points on any boundary are
/// outside.
pub fn classify(p: Point, model: &DomainModel) -> Side {
    if p.norm_sq() >= 1.0 {
        return Side::Outside;
    }
    for e in &model.embedded {
        if e.box_distance(p) > 0.0 {
            continue;
        }
        if e.signed_distance(p) <= 0.0 {
            return Side::Outside;
        }
    }
    Side::Inside
}

/// Deactivate reference interior nodes outside `Omega(t)` or within
/// `0.5 h` of an embedded boundary, then add boundary and ghost nodes on
/// each embedded curve at spacing about `h`.
pub fn adapt_nodes(reference: &NodeSet, model: &DomainModel) -> Result<NodeSet> {
    let h = reference.h;
    for (j, e) in model.embedded.iter().enumerate() {
        if e.samples.iter().any(|(_, p)| p.norm_sq() >= 1.0) {
            return Err(Error::BoundaryIntersection(j));
        }
    }
    let mut out = reference.clone();
    if model.embedded.is_empty() {
        return Ok(out);
    }
    let cull = CULL_DISTANCE * h;
    for i in 0..out.len() {
        if out.role[i] != Role::Interior || !out.active[i] {
            continue;
        }
        let p = out.coords[i];
        if classify(p, model) == Side::Outside || model.embedded_distance(p, cull) < cull {
            out.active[i] = false;
        }
    }
    for (j, e) in model.embedded.iter().enumerate() {
        let count = (e.curve.length() / h).round() as usize;
        if count < MIN_SEEDS {
            return Err(Error::UnderResolved { index: j, nodes: count, h });
        }
        for mu in e.curve.equal_arc_params(count) {
            let p = e.curve.point(mu);
            // The domain's outward normal points into the embedded hole.
            let n = -e.curve.normal(mu)?;
            out.push_boundary(p, n, j + 1);
        }
    }
    Ok(out)
}

/// One forward Kutta RK3 step of `dx/dt = u(x, t)`.
pub fn rk3_step(p: Point, t: f64, dt: f64, u: &dyn Fn(Point, f64) -> Point) -> Point {
    let k1 = u(p, t);
    let k2 = u(p + (0.5 * dt) * k1, t + 0.5 * dt);
    let k3 = u(p + dt * (2.0 * k2 - k1), t + dt);
    p + (dt / 6.0) * (k1 + 4.0 * k2 + k3)
}

/// Move every seed one RK3 step and refit the curves.
pub fn advect_seeds(
    model: &DomainModel,
    velocity: &dyn Fn(Point, f64) -> Point,
    t: f64,
    dt: f64,
) -> Result<DomainModel> {
    let seeds: Vec<Vec<Point>> = model
        .embedded
        .iter()
        .map(|e| e.curve.seeds.iter().map(|&p| rk3_step(p, t, dt, velocity)).collect())
        .collect();
    DomainModel::from_seeds(&seeds, t + dt)
}

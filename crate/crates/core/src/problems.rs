//! Built-in manufactured-solution problems.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::point::Point;

pub type ScalarFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point, f64) -> Point + Send + Sync>;

/// `c_t + u . grad c = nu lap c + f` in the moving domain, with
/// `alpha n . grad c + beta c = g` on every boundary.
#[derive(Clone)]
pub struct ProblemDef {
    pub name: String,
    pub exact: ScalarFn,
    pub grad_exact: VectorFn,
    pub velocity: VectorFn,
    pub div_velocity: ScalarFn,
    pub nu: f64,
    pub alpha: ScalarFn,
    pub beta: ScalarFn,
    pub forcing: ScalarFn,
    /// Seed points of each embedded boundary at `t = 0`.
    pub seeds: Vec<Vec<Point>>,
    pub t_final: f64,
    /// Bound on `|u|` over space and time.
    pub u_max: f64,
}

impl std::fmt::Debug for ProblemDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemDef")
            .field("name", &self.name)
            .field("nu", &self.nu)
            .field("t_final", &self.t_final)
            .field("u_max", &self.u_max)
            .field("embedded", &self.seeds.len())
            .finish()
    }
}

impl ProblemDef {
    /// Boundary data `g = alpha n . grad c + beta c` at `p` with outward
    /// normal `n`.
    pub fn bc_data(&self, p: Point, n: Point, t: f64) -> f64 {
        (self.alpha)(p, t) * n.dot((self.grad_exact)(p, t)) + (self.beta)(p, t) * (self.exact)(p, t)
    }
}

/// Number of seeds on each ellipse.
pub const ELLIPSE_SEEDS: usize = 20;

/// `(0.4 cos mu, -0.5 + 0.2 sin mu)`.
pub fn ellipse_e1(mu: f64) -> Point {
    Point::new(0.4 * mu.cos(), -0.5 + 0.2 * mu.sin())
}

/// `(0.1 cos mu, 0.2 sin mu)`.
pub fn ellipse_e2(mu: f64) -> Point {
    Point::new(0.1 * mu.cos(), 0.2 * mu.sin())
}

fn seeds_of(curve: fn(f64) -> Point) -> Vec<Point> {
    (0..ELLIPSE_SEEDS)
        .map(|j| curve(2.0 * PI * j as f64 / ELLIPSE_SEEDS as f64))
        .collect()
}

/// `max_r r |sin(pi r^2)|` on `[0, 1]`, the speed bound of the swirl.
fn swirl_speed_bound() -> f64 {
    let m = 200_000;
    (0..=m)
        .map(|i| {
            let r = i as f64 / m as f64;
            r * (PI * r * r).sin().abs()
        })
        .fold(0.0, f64::max)
}

fn manufactured() -> (ScalarFn, VectorFn, ScalarFn, ScalarFn) {
    let c: ScalarFn = Arc::new(|p: Point, t: f64| 1.0 + (PI * p.x).sin() * (PI * p.y).cos() * (PI * t).sin());
    let grad: VectorFn = Arc::new(|p: Point, t: f64| {
        let st = (PI * t).sin();
        Point::new(
            PI * (PI * p.x).cos() * (PI * p.y).cos() * st,
            -PI * (PI * p.x).sin() * (PI * p.y).sin() * st,
        )
    });
    let ct: ScalarFn = Arc::new(|p: Point, t: f64| PI * (PI * p.x).sin() * (PI * p.y).cos() * (PI * t).cos());
    let lap: ScalarFn =
        Arc::new(|p: Point, t: f64| -2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).cos() * (PI * t).sin());
    (c, grad, ct, lap)
}

/// Forced advection-diffusion in the unit disk around two moving ellipses.
/// `pe` selects `nu = 1` (1) or `nu = 1e-3` (1000).
pub fn make_disk2d(pe: u32) -> Result<ProblemDef> {
    let nu = match pe {
        1 => 1.0,
        1000 => 1e-3,
        other => return Err(Error::UnknownProblem(format!("disk2d with Pe = {other}"))),
    };
    let (c, grad, ct, lap) = manufactured();
    let velocity: VectorFn = Arc::new(|p: Point, t: f64| {
        let s = (PI * p.norm_sq()).sin() * (PI * t).sin();
        Point::new(s * p.y, -s * p.x)
    });
    let div_velocity: ScalarFn = Arc::new(|p: Point, t: f64| {
        let dc = 2.0 * PI * (PI * p.norm_sq()).cos() * (PI * t).sin();
        // d/dx (s y) + d/dy (-s x)
        dc * p.x * p.y - dc * p.y * p.x
    });
    let forcing: ScalarFn = {
        let (u, g) = (velocity.clone(), grad.clone());
        Arc::new(move |p: Point, t: f64| ct(p, t) + u(p, t).dot(g(p, t)) - nu * lap(p, t))
    };
    Ok(ProblemDef {
        name: format!("disk2d-pe{pe}"),
        exact: c,
        grad_exact: grad,
        velocity,
        div_velocity,
        nu,
        alpha: Arc::new(move |_, _| -nu),
        beta: Arc::new(|_, _| 0.0),
        forcing,
        seeds: vec![seeds_of(ellipse_e1), seeds_of(ellipse_e2)],
        t_final: 0.5,
        u_max: swirl_speed_bound(),
    })
}

/// The same manufactured solution with no flow and no embedded
/// boundaries: a forced heat equation on the fixed disk.
pub fn make_heat() -> ProblemDef {
    let (c, grad, ct, lap) = manufactured();
    let nu = 1.0;
    ProblemDef {
        name: "heat".into(),
        exact: c,
        grad_exact: grad,
        velocity: Arc::new(|_, _| Point::ZERO),
        div_velocity: Arc::new(|_, _| 0.0),
        nu,
        alpha: Arc::new(move |_, _| -nu),
        beta: Arc::new(|_, _| 0.0),
        forcing: Arc::new(move |p, t| ct(p, t) - nu * lap(p, t)),
        seeds: Vec::new(),
        t_final: 0.5,
        u_max: 0.0,
    }
}

/// Look a problem up by name: `disk2d` (with `pe`) or `heat`.
pub fn problem_by_name(name: &str, pe: u32) -> Result<ProblemDef> {
    match name {
        "disk2d" => make_disk2d(pe),
        "heat" => Ok(make_heat()),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

/// `|numeric - exact|_2 / |exact|_2`.
pub fn rel_l2_error(numeric: &[f64], exact: &[f64]) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::Dimension(format!("{} values vs {} exact", numeric.len(), exact.len())));
    }
    let den: f64 = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let num: f64 = numeric.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(rng: &mut ChaCha8Rng) -> (Point, f64) {
        (
            Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            rng.gen_range(0.0..0.5),
        )
    }

    #[test]
    fn examples() {
        let p = make_disk2d(1).unwrap();
        assert_eq!((p.exact)(Point::ZERO, 0.5), 1.0);
        for k in 0..16 {
            let t = 2.0 * PI * k as f64 / 16.0;
            let u = (p.velocity)(Point::new(t.cos(), t.sin()), 0.3);
            assert!(u.norm() < 1e-14);
        }
        assert_eq!(make_disk2d(1000).unwrap().nu, 1e-3);
        assert!(make_disk2d(10).is_err());
        // Stationary point of r sin(pi r^2): tan s = -2 s with s = pi r^2.
        let (mut lo, mut hi) = (PI / 2.0 + 1e-9, PI - 1e-9);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid.tan() + 2.0 * mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = (lo / PI).sqrt();
        let bound = r * (PI * r * r).sin();
        assert!((p.u_max - bound).abs() < 1e-9, "{} vs {bound}", p.u_max);
        assert_eq!(p.seeds[0][0], Point::new(0.4, -0.5));
        assert!(problem_by_name("nope", 1).is_err());
    }

    #[test]
    fn forcing_consistent_with_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for pe in [1, 1000] {
            let p = make_disk2d(pe).unwrap();
            let c = &p.exact;
            let h = 1e-3;
            for _ in 0..1000 {
                let (x, t) = sample(&mut rng);
                let ex = Point::new(h, 0.0);
                let ey = Point::new(0.0, h);
                // fourth-order central differences
                let d1 = |f: &dyn Fn(f64) -> f64| (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h);
                let d2 = |f: &dyn Fn(f64) -> f64| {
                    (-f(-2.0) + 16.0 * f(-1.0) - 30.0 * f(0.0) + 16.0 * f(1.0) - f(2.0)) / (12.0 * h * h)
                };
                let ct = d1(&|k| c(x, t + k * h));
                let cx = d1(&|k| c(x + k * ex, t));
                let cy = d1(&|k| c(x + k * ey, t));
                let lap = d2(&|k| c(x + k * ex, t)) + d2(&|k| c(x + k * ey, t));
                let u = (p.velocity)(x, t);
                let f = ct + u.x * cx + u.y * cy - p.nu * lap;
                assert!((f - (p.forcing)(x, t)).abs() < 1e-5, "{f}");
                let g = (p.grad_exact)(x, t);
                assert!((g.x - cx).abs() < 1e-6 && (g.y - cy).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn velocity_divergence_free() {
        let p = make_disk2d(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let (x, t) = sample(&mut rng);
            assert!((p.div_velocity)(x, t).abs() < 1e-6);
            let h = 1e-5;
            let u = &p.velocity;
            let div = (u(x + Point::new(h, 0.0), t).x - u(x - Point::new(h, 0.0), t).x
                + u(x + Point::new(0.0, h), t).y
                - u(x - Point::new(0.0, h), t).y)
                / (2.0 * h);
            assert!(div.abs() < 1e-6);
        }
    }

    #[test]
    fn bc_data_matches_definition() {
        let p = make_disk2d(1).unwrap();
        let x = Point::new(0.6, 0.8);
        let g = p.bc_data(x, x, 0.2);
        assert!((g + x.dot((p.grad_exact)(x, 0.2))).abs() < 1e-15);
    }

    #[test]
    fn relative_error() {
        assert_eq!(rel_l2_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rel_l2_error(&[2.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert!((rel_l2_error(&[3.0, 0.0], &[3.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(rel_l2_error(&[1.0], &[0.0]), Err(Error::ZeroNorm)));
    }
}

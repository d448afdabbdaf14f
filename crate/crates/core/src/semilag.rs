//! Characteristic back-tracing and departure-point reconstruction.

use crate::geometry::rk3_step;
use crate::operators::InterpBundle;
use crate::point::Point;

/// Departure points of a set of arrival nodes at successive earlier time
/// levels, with the history values interpolated there.
#[derive(Debug, Clone, PartialEq)]
pub struct DepartureSet {
    /// Arrival positions at the new time level.
    pub arrivals: Vec<Point>,
    /// `coords[k][i]`: departure of arrival `i` at `t_arrive - (k + 1) dt`.
    pub coords: Vec<Vec<Point>>,
    /// `values[k][i]`: history level `k` interpolated at `coords[k][i]`.
    pub values: Vec<Vec<f64>>,
}

/// Integrate `dp/dt = u(p, t)` backward from `t_arrive` to `t_target` with
/// RK3 steps of size `dt_sub`.
pub fn back_trace(
    arrivals: &[Point],
    velocity: &dyn Fn(Point, f64) -> Point,
    t_arrive: f64,
    t_target: f64,
    dt_sub: f64,
) -> Vec<Point> {
    assert!(t_target < t_arrive && dt_sub > 0.0);
    let steps = ((t_arrive - t_target) / dt_sub).round().max(1.0) as usize;
    let h = (t_arrive - t_target) / steps as f64;
    arrivals
        .iter()
        .map(|&x| {
            let mut p = x;
            for s in 0..steps {
                p = rk3_step(p, t_arrive - s as f64 * h, -h, velocity);
            }
            p
        })
        .collect()
}

/// Departure points at `levels` earlier levels spaced `dt` apart, chaining
/// one RK3 step per level.
pub fn trace_levels(
    arrivals: &[Point],
    velocity: &dyn Fn(Point, f64) -> Point,
    t_arrive: f64,
    dt: f64,
    levels: usize,
) -> Vec<Vec<Point>> {
    let mut out: Vec<Vec<Point>> = Vec::with_capacity(levels);
    let mut cur = arrivals.to_vec();
    for k in 0..levels {
        let t = t_arrive - k as f64 * dt;
        for p in cur.iter_mut() {
            *p = rk3_step(*p, t, -dt, velocity);
        }
        out.push(cur.clone());
    }
    out
}

/// Interpolate each history level at its departure points. `history[k]`
/// pairs the bundle of level `k` with nodal values on its node set.
pub fn reconstruct(history: &[(&InterpBundle, &[f64])], arrivals: &[Point], coords: Vec<Vec<Point>>) -> DepartureSet {
    assert!(coords.len() <= history.len(), "more departure levels than history levels");
    let values = coords
        .iter()
        .zip(history)
        .map(|(c, (bundle, vals))| bundle.eval(vals, c))
        .collect();
    DepartureSet {
        arrivals: arrivals.to_vec(),
        coords,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_reference_nodes;
    use crate::operators::build_interp_bundle;
    use crate::params::{build_spec, OperatorKind};
    use proptest::prelude::*;

    fn pts() -> Vec<Point> {
        (0..40)
            .map(|i| {
                let a = i as f64 * 0.7;
                let r = 0.02 * i as f64;
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect()
    }

    #[test]
    fn zero_and_constant_velocity() {
        let x = pts();
        let d = back_trace(&x, &|_, _| Point::ZERO, 1.0, 0.9, 0.1);
        assert_eq!(d, x);
        let d = back_trace(&x, &|_, _| Point::new(0.3, -0.2), 1.0, 0.9, 0.1);
        for (a, b) in d.iter().zip(&x) {
            assert!(a.dist(*b - 0.1 * Point::new(0.3, -0.2)) < 1e-15);
        }
    }

    #[test]
    fn rotation_oracle() {
        let w = 2.0;
        let u = move |p: Point, _t: f64| w * Point::new(p.y, -p.x);
        let x = pts();
        let mut prev = f64::INFINITY;
        for dt in [0.1, 0.05, 0.025] {
            let d = back_trace(&x, &u, 1.0, 1.0 - dt, dt);
            let mut err: f64 = 0.0;
            for (p, q) in d.iter().zip(&x) {
                // Forward flow rotates clockwise by w t, so go back counterclockwise.
                let a = w * dt;
                let exact = Point::new(q.x * a.cos() - q.y * a.sin(), q.x * a.sin() + q.y * a.cos());
                err = err.max(p.dist(exact));
                assert!((p.norm() - q.norm()).abs() <= 0.1 * (w * dt).powi(4) * q.norm() + 1e-15);
            }
            assert!(err < prev / 12.0 || prev.is_infinite(), "{err} {prev}");
            prev = err;
        }
    }

    #[test]
    fn chained_levels() {
        let u = |p: Point, t: f64| Point::new(p.y * t, -p.x);
        let x = pts();
        let lv = trace_levels(&x, &u, 0.6, 0.05, 3);
        assert_eq!(lv.len(), 3);
        let direct = back_trace(&x, &u, 0.6, 0.45, 0.05);
        for (a, b) in lv[2].iter().zip(&direct) {
            assert!(a.dist(*b) < 1e-14);
        }
        for (a, b) in lv[0].iter().zip(&back_trace(&x, &u, 0.6, 0.55, 0.05)) {
            assert!(a.dist(*b) < 1e-15);
        }
    }

    #[test]
    fn reconstruction_examples() {
        let ext = generate_reference_nodes(0.1, 2).unwrap().extended();
        let spec = build_spec(OperatorKind::PointEvaluation, 2);
        let (b, _) = build_interp_bundle(&ext, &spec, 0.0).unwrap();
        let x = ext.domain_points().to_vec();
        let five = vec![5.0; x.len()];
        let lin: Vec<f64> = x.iter().map(|p| p.x + 2.0 * p.y).collect();
        let u = |_: Point, _: f64| Point::new(0.2, 0.1);
        let coords = trace_levels(&x, &u, 0.1, 0.1, 1);
        let d = reconstruct(&[(&b, &five)], &x, coords.clone());
        assert!(d.values[0].iter().all(|v| (v - 5.0).abs() < 1e-11));
        let d = reconstruct(&[(&b, &lin)], &x, coords);
        for (v, p) in d.values[0].iter().zip(&d.coords[0]) {
            assert!((v - (p.x + 2.0 * p.y)).abs() < 1e-10);
        }
        let still = trace_levels(&x, &|_, _| Point::ZERO, 0.1, 0.1, 1);
        let d = reconstruct(&[(&b, &lin)], &x, still);
        assert_eq!(d.values[0], lin);
    }

    #[test]
    fn reconstruction_converges() {
        let f = |p: Point| (2.0 * p.x).sin() * (1.5 * p.y + 0.3).cos();
        let u = |p: Point, _: f64| 0.5 * Point::new(p.y, -p.x);
        let xi = 3;
        let spec = build_spec(OperatorKind::PointEvaluation, xi);
        let mut errs = Vec::new();
        let hs = [0.07, 0.05, 0.035, 0.025];
        for &h in &hs {
            let ext = generate_reference_nodes(h, 9).unwrap().extended();
            let (b, _) = build_interp_bundle(&ext, &spec, 0.0).unwrap();
            let x = ext.domain_points().to_vec();
            let vals: Vec<f64> = x.iter().map(|p| f(*p)).collect();
            let coords = trace_levels(&x, &u, 0.0, 0.1, 1);
            let d = reconstruct(&[(&b, &vals)], &x, coords);
            let e2: f64 = d.values[0].iter().zip(&d.coords[0]).map(|(v, p)| (v - f(*p)).powi(2)).sum();
            errs.push((e2 / x.len() as f64).sqrt());
        }
        let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
        let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let (mx, my) = (lx.iter().sum::<f64>() / 4.0, ly.iter().sum::<f64>() / 4.0);
        let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
            / lx.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
        assert!(slope >= spec.ell as f64 + 0.5, "{errs:?} slope {slope}");
    }

    proptest! {
        #[test]
        fn near_involution(x in -0.9f64..0.9, y in -0.9f64..0.9, t in 0.05f64..0.45, dt in 0.005f64..0.05) {
            let u = |p: Point, t: f64| {
                let s = (std::f64::consts::PI * p.norm_sq()).sin() * (std::f64::consts::PI * t).sin();
                Point::new(s * p.y, -s * p.x)
            };
            let p = Point::new(x, y);
            let back = back_trace(&[p], &u, t + dt, t, dt)[0];
            let fwd = rk3_step(back, t, dt, &u);
            let speed = u(p, t + dt).norm().max(1e-3);
            prop_assert!(fwd.dist(p) <= 1e-3 * dt * speed + 1e-14);
        }
    }
}

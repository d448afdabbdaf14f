//! Fit a closed curve through seed points of an ellipse and compare the
//! fitted normals with the exact ones.

use std::f64::consts::PI;

use rbffd_sl::geometry::fit_boundary;
use rbffd_sl::Point;

fn main() -> rbffd_sl::Result<()> {
    let (a, b) = (0.3, 0.15);
    for k in [8, 16, 32, 64] {
        let seeds: Vec<Point> = (0..k)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / k as f64;
                Point::new(a * t.cos(), b * t.sin())
            })
            .collect();
        let curve = fit_boundary(&seeds)?;
        let mut worst: f64 = 0.0;
        for (mu, p) in curve.sample(400) {
            let n = curve.normal(mu)?;
            let exact = Point::new(p.x / (a * a), p.y / (b * b)).normalized();
            worst = worst.max(n.dist(exact).min(n.dist(-1.0 * exact)));
        }
        println!("{k:>3} seeds: length {:.6} (exact 1.4533), max normal error {worst:.2e}", curve.length());
    }
    Ok(())
}

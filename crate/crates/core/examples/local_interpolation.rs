//! Weights of a single local PHS + polynomial stencil: Laplacian of a
//! smooth function at the center and at an off-center point.

use rbffd_sl::geometry::generate_reference_nodes;
use rbffd_sl::params::{build_spec, OperatorKind};
use rbffd_sl::stencils::{make_stencil, KdTree};
use rbffd_sl::weights::{indicators, Functional, LocalSystem};
use rbffd_sl::Point;

fn main() -> rbffd_sl::Result<()> {
    let f = |p: Point| (2.0 * p.x).sin() * (p.y + 0.5).exp();
    let lap = |p: Point| -3.0 * f(p);
    let nodes = generate_reference_nodes(0.05, 3)?;
    let pts = nodes.extended().coords;
    let tree = KdTree::build(&pts);
    let center = tree.nearest(Point::new(0.0, 0.0)).expect("nodes");
    for xi in [2, 4, 6] {
        let spec = build_spec(OperatorKind::Laplacian, xi);
        let st = make_stencil(&tree, center, spec.n)?;
        let xs: Vec<Point> = st.neighbors.iter().map(|&j| pts[j]).collect();
        let sys = LocalSystem::assemble(&xs, center, spec.ell, spec.m)?;
        let targets: Vec<(Point, Functional)> = xs.iter().map(|&p| (p, Functional::Laplacian)).collect();
        let w = sys.solve_weights(&targets);
        let vals: Vec<f64> = xs.iter().map(|&p| f(p)).collect();
        let approx = |j: usize| w.column(j).iter().zip(&vals).map(|(a, b)| a * b).sum::<f64>();
        let ind = indicators(&w, 0);
        println!(
            "xi={xi} n={}: center error {:.2e}, node 1 error {:.2e}, {} of {} nodes pass the indicators",
            spec.n,
            (approx(0) - lap(xs[0])).abs(),
            (approx(1) - lap(xs[1])).abs(),
            ind.accepted.iter().filter(|&&a| a).count(),
            xs.len()
        );
    }
    Ok(())
}

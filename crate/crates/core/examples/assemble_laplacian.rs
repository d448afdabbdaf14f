//! Assemble the overlapped Laplacian on the disk and apply it to a
//! polynomial and to a smooth function.

use rbffd_sl::diagnostics::center_screen;
use rbffd_sl::geometry::generate_reference_nodes;
use rbffd_sl::operators::{assemble, OpData};
use rbffd_sl::params::{build_spec, OperatorKind};
use rbffd_sl::Point;

fn main() -> rbffd_sl::Result<()> {
    let ext = generate_reference_nodes(0.05, 1)?.extended();
    let f = |p: Point| (p.x * 3.0).cos() * p.y.sin();
    let lap = |p: Point| -10.0 * f(p);
    for xi in [2, 4, 6] {
        let spec = build_spec(OperatorKind::Laplacian, xi);
        let (l, stats) = assemble(&ext, &spec, OpData::Laplacian)?;
        let quad: Vec<f64> = ext.coords.iter().map(|p| p.x * p.x + 2.0 * p.y * p.y).collect();
        let smooth: Vec<f64> = ext.coords.iter().map(|&p| f(p)).collect();
        let lq = l.matrix.matvec(&quad);
        let ls = l.matrix.matvec(&smooth);
        let poly_err = lq.iter().map(|v| (v - 6.0).abs()).fold(0.0, f64::max);
        let err = ls
            .iter()
            .zip(&l.row_nodes)
            .map(|(v, &i)| (v - lap(ext.coords[i])).abs())
            .fold(0.0, f64::max);
        let (pass, total) = center_screen(&l);
        println!(
            "xi={xi}: {} rows from {} stencils (kappa {:.2}), quadratic error {poly_err:.1e}, smooth error {err:.2e}, center screen {pass}/{total}",
            stats.rows, stats.n_s, stats.kappa
        );
    }
    Ok(())
}

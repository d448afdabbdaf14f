//! Spatial convergence on the moving-ellipse problem.
//!
//! ```text
//! cargo run --release --example convergence -- 1
//! ```

use rbffd_sl::diagnostics::{convergence_run, convergence_slope};
use rbffd_sl::geometry::spacing_for_target;
use rbffd_sl::problems::make_disk2d;

fn main() -> rbffd_sl::Result<()> {
    let pe: u32 = std::env::args().nth(1).map(|s| s.parse().expect("Peclet number")).unwrap_or(1);
    let hs = [500, 1000, 2000].iter().map(|&n| spacing_for_target(n, 1)).collect::<Result<Vec<_>, _>>()?;
    let rows = convergence_run(&make_disk2d(pe)?, &[2, 4], &hs, 1, 1)?;
    for r in &rows {
        println!("xi={} N={:>5} error {:.3e} iters {:.1}", r.xi, r.n, r.error, r.iters);
    }
    for xi in [2, 4] {
        println!("xi={xi}: slope {:.2}", convergence_slope(&rows, xi));
    }
    Ok(())
}

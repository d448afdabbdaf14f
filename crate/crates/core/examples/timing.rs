//! Preprocessing and per-step cost against node count.

use rbffd_sl::diagnostics::{loglog_slope, timing_run};
use rbffd_sl::geometry::spacing_for_target;
use rbffd_sl::problems::make_disk2d;

fn main() -> rbffd_sl::Result<()> {
    let hs = [700, 1400, 2800].iter().map(|&n| spacing_for_target(n, 1)).collect::<Result<Vec<_>, _>>()?;
    let rows = timing_run(&make_disk2d(1000)?, 2, &hs, 1, 5)?;
    for r in &rows {
        println!("N={:>5} preprocess {:>8.1} ms, step {:>7.1} ms", r.n, r.preprocess_ms, r.step_ms);
    }
    let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let s: Vec<f64> = rows.iter().map(|r| r.step_ms).collect();
    println!("step time grows like N^{:.2}", loglog_slope(&n, &s));
    Ok(())
}

//! Temporal order of the BDF scheme on the heat problem.

use rbffd_sl::diagnostics::{loglog_slope, temporal_run};
use rbffd_sl::problems::make_heat;

fn main() -> rbffd_sl::Result<()> {
    let dts = [0.125, 0.0625, 0.03125];
    let errs = temporal_run(&make_heat(), 6, 0.06, &dts, 1, 1)?;
    for (dt, e) in dts.iter().zip(&errs) {
        println!("dt={dt:<8} error {e:.3e}");
    }
    println!("observed order {:.2}", loglog_slope(&dts, &errs));
    Ok(())
}

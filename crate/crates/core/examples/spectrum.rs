//! Rightmost eigenvalue of the Neumann Laplacian for each PHS scaling law.

use rbffd_sl::diagnostics::spectrum_study;
use rbffd_sl::geometry::{generate_reference_nodes, spacing_for_target};
use rbffd_sl::params::ScalingLaw;

fn main() -> rbffd_sl::Result<()> {
    let h = spacing_for_target(658, 1)?;
    let ext = generate_reference_nodes(h, 1)?.extended();
    let ell = 6;
    for law in [ScalingLaw::Classical, ScalingLaw::PlusOne, ScalingLaw::MinusOne] {
        let s = spectrum_study(&ext, ell, law)?;
        println!("N={} ell={ell} {law:?}: max Re {:+.3e}, trace {:.3e}", ext.n(), s.max_re, s.trace);
    }
    Ok(())
}

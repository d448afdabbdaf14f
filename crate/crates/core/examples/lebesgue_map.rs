//! Lebesgue constants of Laplacian stencils on scattered points in the square.

use rbffd_sl::diagnostics::{halton_with_boundary, lebesgue_map, median};
use rbffd_sl::params::ScalingLaw;

fn main() -> rbffd_sl::Result<()> {
    let pts = halton_with_boundary(1000, 31);
    for ell in [4, 6] {
        for law in [ScalingLaw::Classical, ScalingLaw::PlusOne, ScalingLaw::MinusOne] {
            let map = lebesgue_map(&pts, ell, law)?;
            let worst = map.stencil_max.iter().cloned().fold(0.0, f64::max);
            println!(
                "ell={ell} {law:?}: median at node {:.3e}, median over stencil {:.3e}, worst {worst:.3e}",
                median(&map.at_node),
                median(&map.stencil_max)
            );
        }
    }
    Ok(())
}

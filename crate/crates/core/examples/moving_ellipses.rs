//! Advection-diffusion in the disk with two moving elliptical holes.
//!
//! ```text
//! cargo run --release --example moving_ellipses -- 1000 1400
//! ```

use rbffd_sl::geometry::spacing_for_target;
use rbffd_sl::problems::make_disk2d;
use rbffd_sl::timestepper::{SolverConfig, SolverState};

fn main() -> rbffd_sl::Result<()> {
    let mut args = std::env::args().skip(1);
    let pe: u32 = args.next().map(|s| s.parse().expect("Peclet number")).unwrap_or(1000);
    let n: usize = args.next().map(|s| s.parse().expect("node count")).unwrap_or(1400);
    let h = spacing_for_target(n, 1)?;
    let mut state = SolverState::init(make_disk2d(pe)?, SolverConfig::new(2, h, 1))?;
    println!("{} steps of dt={:.4}, h={h:.4}", state.n_steps, state.dt);
    while !state.is_done() {
        let r = state.step()?.clone();
        if r.step % 10 == 0 || state.is_done() {
            println!(
                "step {:>4} t={:.3} N={} copied {} recomputed {} gmres {}",
                r.step, r.t, r.n, r.rows_copied, r.rows_recomputed, r.gmres_iters
            );
        }
    }
    println!("relative error {:.3e}, mean GMRES iterations {:.1}", state.error()?, state.mean_iterations());
    Ok(())
}

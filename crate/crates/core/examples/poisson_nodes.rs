//! Generate a node set on the unit disk and write it as CSV.
//!
//! ```text
//! cargo run --example poisson_nodes -- 0.05 nodes.csv
//! ```

use std::fs::File;

use rbffd_sl::geometry::{generate_reference_nodes, io::write_nodes};

fn main() -> rbffd_sl::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map(|s| s.parse().expect("spacing")).unwrap_or(0.05);
    let out = args.next().unwrap_or_else(|| "nodes.csv".into());
    let nodes = generate_reference_nodes(h, 1)?;
    let ext = nodes.extended();
    write_nodes(&ext, File::create(&out)?)?;
    let min_gap = ext.domain_points().iter().enumerate().fold(f64::INFINITY, |acc, (i, p)| {
        ext.domain_points()[i + 1..].iter().fold(acc, |a, q| a.min(p.dist(*q)))
    });
    println!(
        "h={h}: {} interior, {} boundary, {} ghost nodes, min gap {min_gap:.4} -> {out}",
        ext.n_interior,
        ext.n_boundary,
        ext.n_ext() - ext.n()
    );
    Ok(())
}

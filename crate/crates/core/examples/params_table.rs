//! Print the polynomial degree, PHS exponent and stencil size of every
//! operator for a range of target orders.

use rbffd_sl::params::{build_spec, phs_degree_alt, OperatorKind, ScalingLaw};

fn main() {
    println!("{:>3} {:>16} {:>5} {:>3} {:>4}", "xi", "operator", "ell", "m", "n");
    for xi in 1..=6 {
        for kind in [OperatorKind::Laplacian, OperatorKind::BoundaryRobin, OperatorKind::PointEvaluation] {
            let s = build_spec(kind, xi);
            println!("{xi:>3} {:>16} {:>5} {:>3} {:>4}", format!("{kind:?}"), s.ell, s.m, s.n);
        }
    }
    println!();
    println!("PHS exponent per scaling law");
    for ell in 2..=8 {
        let m: Vec<u32> = [ScalingLaw::Classical, ScalingLaw::PlusOne, ScalingLaw::MinusOne]
            .iter()
            .map(|&l| phs_degree_alt(ell, l))
            .collect();
        println!("ell={ell}: classical {} plus-one {} minus-one {}", m[0], m[1], m[2]);
    }
}

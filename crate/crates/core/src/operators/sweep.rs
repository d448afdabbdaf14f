//! The overlapped stencil sweep shared by every assembled operator.

use crate::error::Result;
use crate::params::OperatorSpec;
use crate::point::Point;
use crate::stencils::{make_stencil, KdTree};
use crate::weights::{indicators, Functional, LocalSystem};

/// A stencil placed by the sweep and the equation nodes it wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilRecord {
    pub center: usize,
    /// Pool indices, center first.
    pub neighbors: Vec<usize>,
    /// Pool indices of the equation nodes whose rows came from this stencil.
    pub rows: Vec<usize>,
}

/// Weights for one equation node, aligned with its stencil's neighbors.
#[derive(Debug, Clone)]
pub struct RowWeights {
    pub stencil: usize,
    pub weights: Vec<f64>,
}

pub struct SweepOutput {
    pub records: Vec<StencilRecord>,
    /// Factored local systems, kept only when requested.
    pub systems: Vec<LocalSystem>,
    /// Indexed by pool node; `Some` for every node claimed in this sweep.
    pub rows: Vec<Option<RowWeights>>,
}

/// Candidates farther than this fraction of the stencil radius from the
/// center are never offered to the indicator test.
pub const CANDIDATE_RADIUS: f64 = 0.6;
/// Tighter radius for point evaluation, whose rows are applied again at
/// every step of the semi-Lagrangian update.
pub const EVAL_CANDIDATE_RADIUS: f64 = 0.4;

fn candidate_radius(f: Functional) -> f64 {
    match f {
        Functional::Eval => EVAL_CANDIDATE_RADIUS,
        _ => CANDIDATE_RADIUS,
    }
}

/// Visit unclaimed equation nodes in ascending order. Each becomes a
/// stencil center; its weights are computed for itself and every other
/// unclaimed equation node close enough to it, and rows that pass both
/// indicator tests against the center are claimed.
///
/// `targets[i]` is the functional at pool node `i`, or `None` for nodes
/// that own no equation. `claimed` is updated in place.
pub fn sweep(
    pool: &[Point],
    tree: &KdTree,
    targets: &[Option<Functional>],
    claimed: &mut [bool],
    spec: &OperatorSpec,
    keep_systems: bool,
) -> Result<SweepOutput> {
    let mut out = SweepOutput {
        records: Vec::new(),
        systems: Vec::new(),
        rows: vec![None; pool.len()],
    };
    for center in 0..pool.len() {
        let Some(fc) = targets[center] else { continue };
        if claimed[center] {
            continue;
        }
        let st = make_stencil(tree, center, spec.n)?;
        let coords: Vec<Point> = st.neighbors.iter().map(|&i| pool[i]).collect();
        let ls = LocalSystem::assemble(&coords, center, spec.ell, spec.m)?;
        let rho = coords.iter().map(|p| p.dist(coords[0])).fold(0.0, f64::max);
        let mut cand = vec![(0usize, center)];
        for (k, &j) in st.neighbors.iter().enumerate().skip(1) {
            if targets[j].is_some() && !claimed[j] && coords[k].dist(coords[0]) <= candidate_radius(fc) * rho {
                cand.push((k, j));
            }
        }
        let tl: Vec<(Point, Functional)> = std::iter::once((pool[center], fc))
            .chain(cand[1..].iter().map(|&(k, j)| (coords[k], targets[j].unwrap())))
            .collect();
        let w = ls.solve_weights(&tl);
        let ind = indicators(&w, 0);
        let sid = out.records.len();
        let mut rows = Vec::new();
        for (c, &(_, j)) in cand.iter().enumerate() {
            if ind.accepted[c] {
                claimed[j] = true;
                rows.push(j);
                out.rows[j] = Some(RowWeights {
                    stencil: sid,
                    weights: w.column(c),
                });
            }
        }
        out.records.push(StencilRecord {
            center,
            neighbors: st.neighbors,
            rows,
        });
        if keep_systems {
            out.systems.push(ls);
        }
    }
    Ok(out)
}

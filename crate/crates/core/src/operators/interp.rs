//! Overlapped local interpolation with stored factorizations.

use crate::error::Result;
use crate::geometry::ExtendedSet;
use crate::operators::diffmatrix::{position_map, surviving_stencil, AssemblyStats};
use crate::operators::sweep::{sweep, StencilRecord};
use crate::params::OperatorSpec;
use crate::point::Point;
use crate::stencils::KdTree;
use crate::weights::{Functional, LocalSystem};

/// Local interpolants covering the interior and boundary nodes (never
/// ghosts). A query is evaluated with the stencil whose center is nearest.
#[derive(Debug, Clone)]
pub struct InterpBundle {
    pub points: Vec<Point>,
    /// Sorted by center index.
    pub stencils: Vec<StencilRecord>,
    pub systems: Vec<LocalSystem>,
    pub t: f64,
    centers: KdTree,
    nodes: KdTree,
}

impl InterpBundle {
    fn from_parts(points: Vec<Point>, mut parts: Vec<(StencilRecord, LocalSystem)>, t: f64) -> InterpBundle {
        parts.sort_by_key(|(r, _)| r.center);
        let (stencils, systems): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        let cpos: Vec<Point> = stencils.iter().map(|r: &StencilRecord| points[r.center]).collect();
        InterpBundle {
            centers: KdTree::build(&cpos),
            nodes: KdTree::build(&points),
            points,
            stencils,
            systems,
            t,
        }
    }

    /// Stencil used for a query point.
    pub fn stencil_for(&self, q: Point) -> usize {
        self.centers.nearest(q).expect("bundle has stencils")
    }

    /// Interpolate `values` (one per node) to `queries`.
    pub fn eval(&self, values: &[f64], queries: &[Point]) -> Vec<f64> {
        assert_eq!(values.len(), self.points.len());
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.stencils.len()];
        let mut out = vec![0.0; queries.len()];
        for (qi, &q) in queries.iter().enumerate() {
            if let Some(&(d2, j)) = self.nodes.query_with_dist(q, 1).first() {
                if d2 == 0.0 {
                    out[qi] = values[j];
                    continue;
                }
            }
            groups[self.stencil_for(q)].push(qi);
        }
        for (s, g) in groups.iter().enumerate() {
            if g.is_empty() {
                continue;
            }
            let local: Vec<f64> = self.stencils[s].neighbors.iter().map(|&i| values[i]).collect();
            let coefs = self.systems[s].coefficients(&local);
            for &qi in g {
                out[qi] = self.systems[s].evaluate(&coefs, queries[qi]);
            }
        }
        out
    }
}

fn eval_targets(n: usize) -> Vec<Option<Functional>> {
    vec![Some(Functional::Eval); n]
}

/// Sweep the point-evaluation operator over `X = X_i + X_b`.
pub fn build_interp_bundle(ext: &ExtendedSet, spec: &OperatorSpec, t: f64) -> Result<(InterpBundle, AssemblyStats)> {
    let points = ext.domain_points().to_vec();
    let tree = KdTree::build(&points);
    let mut claimed = vec![false; points.len()];
    let out = sweep(&points, &tree, &eval_targets(points.len()), &mut claimed, spec, true)?;
    let stats = AssemblyStats {
        n_s: out.records.len(),
        rows: points.len(),
        rows_copied: 0,
        rows_recomputed: points.len(),
        kappa: spec.n as f64 * out.records.len() as f64 / points.len() as f64,
        tau: 0.0,
    };
    let parts = out.records.into_iter().zip(out.systems).collect();
    Ok((InterpBundle::from_parts(points, parts, t), stats))
}

/// Rebuild on `new_ext`, reusing factorizations of unchanged stencils.
pub fn update_interp_bundle(
    old: &InterpBundle,
    new_ext: &ExtendedSet,
    spec: &OperatorSpec,
    t: f64,
) -> Result<(InterpBundle, AssemblyStats)> {
    let points = new_ext.domain_points().to_vec();
    let tree = KdTree::build(&points);
    let map = position_map(&old.points, &tree);
    let mut claimed = vec![false; points.len()];
    let mut parts = Vec::new();
    let mut copied = 0;
    for (rec, sys) in old.stencils.iter().zip(&old.systems) {
        let Some((center, neighbors)) = surviving_stencil(rec, &map, &tree, spec.n)? else { continue };
        let mut rows = Vec::new();
        for &r in &rec.rows {
            if let Some(nr) = map[r] {
                if !claimed[nr] {
                    claimed[nr] = true;
                    rows.push(nr);
                }
            }
        }
        copied += rows.len();
        let mut sys = sys.clone();
        sys.center_id = center;
        parts.push((StencilRecord { center, neighbors, rows }, sys));
    }
    let out = sweep(&points, &tree, &eval_targets(points.len()), &mut claimed, spec, true)?;
    parts.extend(out.records.into_iter().zip(out.systems));
    let n = points.len();
    let stats = AssemblyStats {
        n_s: parts.len(),
        rows: n,
        rows_copied: copied,
        rows_recomputed: n - copied,
        kappa: spec.n as f64 * parts.len() as f64 / n as f64,
        tau: copied as f64 / n as f64,
    };
    Ok((InterpBundle::from_parts(points, parts, t), stats))
}

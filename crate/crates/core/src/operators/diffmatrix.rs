//! Sparse differentiation matrices: assembly and incremental update.

use crate::error::{Error, Result};
use crate::geometry::ExtendedSet;
use crate::linalg::SparseMat;
use crate::operators::sweep::{sweep, StencilRecord};
use crate::params::{OperatorKind, OperatorSpec};
use crate::point::Point;
use crate::stencils::{make_stencil, KdTree};
use crate::weights::Functional;

/// Positions closer than this are treated as the same node across steps.
pub const SAME_POSITION: f64 = 1e-12;

/// Per-node data for the operator being assembled.
#[derive(Debug, Clone, Copy)]
pub enum OpData<'a> {
    /// Rows for interior and boundary nodes.
    Laplacian,
    /// Rows for boundary nodes; `alpha[k]`, `beta[k]` for boundary node `k`.
    Robin { alpha: &'a [f64], beta: &'a [f64] },
}

/// Node partitions of rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Interior,
    Boundary,
    Ghost,
}

/// Assembled operator. Columns index the extended node set; each row
/// belongs to one equation node.
#[derive(Debug, Clone)]
pub struct DiffMatrix {
    pub kind: OperatorKind,
    pub matrix: SparseMat,
    /// Extended-set index of the node owning each row.
    pub row_nodes: Vec<usize>,
    /// Stencil that produced each row.
    pub row_origin: Vec<usize>,
    pub row_functionals: Vec<Functional>,
    pub stencils: Vec<StencilRecord>,
    pub n_interior: usize,
    pub n_boundary: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AssemblyStats {
    pub n_s: usize,
    pub rows: usize,
    pub rows_copied: usize,
    pub rows_recomputed: usize,
    /// `n N_s / N`.
    pub kappa: f64,
    /// Fraction of rows copied.
    pub tau: f64,
}

impl AssemblyStats {
    fn new(n: usize, n_s: usize, rows: usize, copied: usize) -> AssemblyStats {
        AssemblyStats {
            n_s,
            rows,
            rows_copied: copied,
            rows_recomputed: rows - copied,
            kappa: n as f64 * n_s as f64 / rows.max(1) as f64,
            tau: copied as f64 / rows.max(1) as f64,
        }
    }
}

fn targets(ext: &ExtendedSet, data: OpData) -> Result<(OperatorKind, Vec<Option<Functional>>)> {
    let mut t = vec![None; ext.n_ext()];
    match data {
        OpData::Laplacian => {
            for slot in t.iter_mut().take(ext.n()) {
                *slot = Some(Functional::Laplacian);
            }
            Ok((OperatorKind::Laplacian, t))
        }
        OpData::Robin { alpha, beta } => {
            if alpha.len() != ext.n_boundary || beta.len() != ext.n_boundary {
                return Err(Error::Dimension(format!(
                    "{} boundary nodes but {} alpha and {} beta values",
                    ext.n_boundary,
                    alpha.len(),
                    beta.len()
                )));
            }
            for k in 0..ext.n_boundary {
                t[ext.n_interior + k] = Some(Functional::Robin {
                    alpha: alpha[k],
                    beta: beta[k],
                    normal: ext.normals[k],
                });
            }
            Ok((OperatorKind::BoundaryRobin, t))
        }
    }
}

/// Row number of each equation node, in ascending node order.
fn row_numbers(targets: &[Option<Functional>]) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut row_of = vec![None; targets.len()];
    let mut nodes = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        if t.is_some() {
            row_of[i] = Some(nodes.len());
            nodes.push(i);
        }
    }
    (row_of, nodes)
}

struct Builder {
    rows: Vec<Option<(usize, Vec<(usize, f64)>)>>,
    records: Vec<StencilRecord>,
}

impl Builder {
    fn run_sweep(
        &mut self,
        pool: &[Point],
        tree: &KdTree,
        targets: &[Option<Functional>],
        row_of: &[Option<usize>],
        claimed: &mut [bool],
        spec: &OperatorSpec,
    ) -> Result<()> {
        let out = sweep(pool, tree, targets, claimed, spec, false)?;
        let base = self.records.len();
        for (node, rw) in out.rows.into_iter().enumerate() {
            if let Some(rw) = rw {
                let nb = &out.records[rw.stencil].neighbors;
                let entries = nb.iter().copied().zip(rw.weights).collect();
                self.rows[row_of[node].unwrap()] = Some((base + rw.stencil, entries));
            }
        }
        self.records.extend(out.records);
        Ok(())
    }

    fn finish(
        self,
        kind: OperatorKind,
        ext: &ExtendedSet,
        nodes: Vec<usize>,
        targets: &[Option<Functional>],
    ) -> DiffMatrix {
        let mut origin = Vec::with_capacity(nodes.len());
        let mut entries = Vec::with_capacity(nodes.len());
        for r in self.rows {
            let (s, e) = r.expect("sweep leaves no equation node unclaimed");
            origin.push(s);
            entries.push(e);
        }
        DiffMatrix {
            kind,
            matrix: SparseMat::from_rows(targets.len(), entries),
            row_functionals: nodes.iter().map(|&i| targets[i].unwrap()).collect(),
            row_nodes: nodes,
            row_origin: origin,
            stencils: self.records,
            n_interior: ext.n_interior,
            n_boundary: ext.n_boundary,
        }
    }
}

/// Assemble `L` (rows for interior and boundary nodes) or `B` (rows for
/// boundary nodes) over the extended node set.
pub fn assemble(ext: &ExtendedSet, spec: &OperatorSpec, data: OpData) -> Result<(DiffMatrix, AssemblyStats)> {
    let (kind, targets) = targets(ext, data)?;
    let (row_of, nodes) = row_numbers(&targets);
    let tree = KdTree::build(&ext.coords);
    let mut claimed = vec![false; targets.len()];
    let mut b = Builder {
        rows: vec![None; nodes.len()],
        records: Vec::new(),
    };
    b.run_sweep(&ext.coords, &tree, &targets, &row_of, &mut claimed, spec)?;
    let stats = AssemblyStats::new(spec.n, b.records.len(), nodes.len(), 0);
    Ok((b.finish(kind, ext, nodes, &targets), stats))
}

/// Map every old node to the new node at the same position, if any.
pub fn position_map(old: &[Point], tree: &KdTree) -> Vec<Option<usize>> {
    old.iter()
        .map(|&p| {
            tree.query_with_dist(p, 1)
                .first()
                .filter(|(d2, _)| d2.sqrt() <= SAME_POSITION)
                .map(|&(_, j)| j)
        })
        .collect()
}

/// Mapped neighbor list if the stencil at the old center would be chosen
/// identically on the new node set.
pub fn surviving_stencil(
    rec: &StencilRecord,
    map: &[Option<usize>],
    tree: &KdTree,
    n: usize,
) -> Result<Option<(usize, Vec<usize>)>> {
    let Some(center) = map[rec.center] else { return Ok(None) };
    let mut mapped = Vec::with_capacity(rec.neighbors.len());
    for &j in &rec.neighbors {
        match map[j] {
            Some(k) => mapped.push(k),
            None => return Ok(None),
        }
    }
    let fresh = make_stencil(tree, center, n)?;
    let mut a = fresh.neighbors.clone();
    let mut b = mapped.clone();
    a.sort_unstable();
    b.sort_unstable();
    Ok((a == b).then_some((center, mapped)))
}

/// Rebuild an operator on `new_ext`, copying rows from stencils of `old`
/// whose centers and neighbor sets are unchanged and recomputing the rest.
pub fn update(
    old: &DiffMatrix,
    old_ext: &ExtendedSet,
    new_ext: &ExtendedSet,
    spec: &OperatorSpec,
    data: OpData,
) -> Result<(DiffMatrix, AssemblyStats)> {
    let (kind, targets) = targets(new_ext, data)?;
    let (row_of, nodes) = row_numbers(&targets);
    let tree = KdTree::build(&new_ext.coords);
    let map = position_map(&old_ext.coords, &tree);
    let mut claimed = vec![false; targets.len()];
    let mut b = Builder {
        rows: vec![None; nodes.len()],
        records: Vec::new(),
    };
    let old_row: Vec<Option<usize>> = {
        let mut v = vec![None; old.matrix.ncols()];
        for (r, &node) in old.row_nodes.iter().enumerate() {
            v[node] = Some(r);
        }
        v
    };
    let mut copied = 0;
    for rec in &old.stencils {
        let Some((center, mapped)) = surviving_stencil(rec, &map, &tree, spec.n)? else { continue };
        let sid = b.records.len();
        let mut rows = Vec::new();
        for &r in &rec.rows {
            let Some(nr) = map[r] else { continue };
            let (Some(ft), Some(or)) = (targets[nr], old_row[r]) else { continue };
            if claimed[nr] || ft != old.row_functionals[or] {
                continue;
            }
            let (cols, vals) = old.matrix.row(or);
            let entries: Vec<(usize, f64)> = cols
                .iter()
                .zip(vals)
                .map(|(&c, &v)| (map[c].expect("stencil columns survive"), v))
                .collect();
            b.rows[row_of[nr].unwrap()] = Some((sid, entries));
            claimed[nr] = true;
            rows.push(nr);
            copied += 1;
        }
        if !rows.is_empty() {
            b.records.push(StencilRecord {
                center,
                neighbors: mapped,
                rows,
            });
        }
    }
    b.run_sweep(&new_ext.coords, &tree, &targets, &row_of, &mut claimed, spec)?;
    let stats = AssemblyStats::new(spec.n, b.records.len(), nodes.len(), copied);
    Ok((b.finish(kind, new_ext, nodes, &targets), stats))
}

impl DiffMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn col_range(&self, p: Part) -> std::ops::Range<usize> {
        let n = self.n_interior + self.n_boundary;
        match p {
            Part::Interior => 0..self.n_interior,
            Part::Boundary => self.n_interior..n,
            Part::Ghost => n..n + self.n_boundary,
        }
    }

    fn row_range(&self, p: Part) -> std::ops::Range<usize> {
        let lo = self.row_nodes.partition_point(|&i| i < self.col_range(p).start);
        let hi = self.row_nodes.partition_point(|&i| i < self.col_range(p).end);
        lo..hi
    }

    /// Sub-block with rows owned by nodes of `rows` and columns of `cols`,
    /// e.g. `L_ib` or `B_bg`.
    pub fn block(&self, rows: Part, cols: Part) -> SparseMat {
        self.matrix.block(self.row_range(rows), self.col_range(cols))
    }

    /// Write `row col value` lines.
    pub fn write_coo<W: std::io::Write>(&self, w: W) -> Result<()> {
        self.matrix.write_coo(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{adapt_nodes, generate_reference_nodes, DomainModel};
    use crate::params::build_spec;
    use crate::weights::indicators;
    use crate::weights::LocalSystem;
    use std::f64::consts::PI;

    fn ellipse(k: usize, a: f64, b: f64, c: Point) -> Vec<Point> {
        (0..k)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / k as f64;
                c + Point::new(a * t.cos(), b * t.sin())
            })
            .collect()
    }

    fn poly(p: Point) -> (f64, f64) {
        // x^3 + x^2 y - 2 x y^2 + y^3 and its Laplacian
        let v = p.x.powi(3) + p.x * p.x * p.y - 2.0 * p.x * p.y * p.y + p.y.powi(3);
        let lap = 2.0 * p.x + 8.0 * p.y;
        (v, lap)
    }

    #[test]
    fn laplacian_exact_on_polynomial() {
        let ext = generate_reference_nodes(0.1, 1).unwrap().extended();
        let spec = build_spec(OperatorKind::Laplacian, 2);
        let (l, stats) = assemble(&ext, &spec, OpData::Laplacian).unwrap();
        assert_eq!(l.rows(), ext.n());
        assert!(stats.n_s < ext.n());
        assert!(stats.kappa >= 1.0 && stats.kappa <= spec.n as f64);
        let vals: Vec<f64> = ext.coords.iter().map(|p| poly(*p).0).collect();
        let lv = l.matrix.matvec(&vals);
        for (r, &node) in l.row_nodes.iter().enumerate() {
            let exact = poly(ext.coords[node]).1;
            assert!((lv[r] - exact).abs() <= 1e-7 * exact.abs().max(1.0), "row {r}");
            assert!(l.matrix.row(r).0.len() <= spec.n);
        }
        assert!(l.matrix.is_well_formed());
    }

    #[test]
    fn rows_pass_indicators_post_hoc() {
        let ext = generate_reference_nodes(0.12, 4).unwrap().extended();
        let spec = build_spec(OperatorKind::Laplacian, 4);
        let (l, _) = assemble(&ext, &spec, OpData::Laplacian).unwrap();
        for (r, &node) in l.row_nodes.iter().enumerate() {
            let rec = &l.stencils[l.row_origin[r]];
            assert!(rec.rows.contains(&node));
            let coords: Vec<Point> = rec.neighbors.iter().map(|&i| ext.coords[i]).collect();
            let ls = LocalSystem::assemble(&coords, rec.center, spec.ell, spec.m).unwrap();
            let w = ls.solve_weights(&[
                (ext.coords[rec.center], Functional::Laplacian),
                (ext.coords[node], Functional::Laplacian),
            ]);
            let ind = indicators(&w, 0);
            assert!(ind.accepted[1]);
            let mut cols: Vec<usize> = rec.neighbors.clone();
            cols.sort_unstable();
            assert_eq!(l.matrix.row(r).0, cols.as_slice());
        }
    }

    #[test]
    fn one_global_stencil_covers_all() {
        let pts: Vec<Point> = (0..21)
            .map(|i| {
                let t = i as f64 * 2.399;
                let r = (i as f64 / 21.0).sqrt();
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let ext = ExtendedSet {
            coords: pts,
            n_interior: 21,
            n_boundary: 0,
            normals: vec![],
            curve: vec![],
            source: (0..21).collect(),
            h: 0.2,
        };
        let spec = build_spec(OperatorKind::Laplacian, 2);
        let (l, stats) = assemble(&ext, &spec, OpData::Laplacian).unwrap();
        assert_eq!(l.rows(), 21);
        assert!(stats.n_s >= 1);
    }

    #[test]
    fn robin_rows_exact() {
        let ext = generate_reference_nodes(0.1, 2).unwrap().extended();
        let spec = build_spec(OperatorKind::BoundaryRobin, 2);
        let nb = ext.n_boundary;
        let alpha = vec![-1.0; nb];
        let beta = vec![0.5; nb];
        let (b, _) = assemble(&ext, &spec, OpData::Robin { alpha: &alpha, beta: &beta }).unwrap();
        assert_eq!(b.rows(), nb);
        let vals: Vec<f64> = ext.coords.iter().map(|p| p.x * p.x - p.x * p.y).collect();
        let bv = b.matrix.matvec(&vals);
        for k in 0..nb {
            let p = ext.boundary_points()[k];
            let n = ext.normals[k];
            let g = Point::new(2.0 * p.x - p.y, -p.x);
            let exact = -n.dot(g) + 0.5 * (p.x * p.x - p.x * p.y);
            assert!((bv[k] - exact).abs() < 1e-7 * exact.abs().max(1.0));
        }
        assert!(assemble(&ext, &spec, OpData::Robin { alpha: &alpha[1..], beta: &beta }).is_err());
    }

    #[test]
    fn update_identical_copies_everything() {
        let ext = generate_reference_nodes(0.1, 3).unwrap().extended();
        let spec = build_spec(OperatorKind::Laplacian, 2);
        let (l, _) = assemble(&ext, &spec, OpData::Laplacian).unwrap();
        let (l2, stats) = update(&l, &ext, &ext, &spec, OpData::Laplacian).unwrap();
        assert_eq!(stats.rows_recomputed, 0);
        assert_eq!(stats.tau, 1.0);
        assert_eq!(l2.matrix, l.matrix);
    }

    #[test]
    fn changed_coefficients_recompute_boundary_rows() {
        let ext = generate_reference_nodes(0.1, 3).unwrap().extended();
        let spec = build_spec(OperatorKind::BoundaryRobin, 2);
        let nb = ext.n_boundary;
        let (a1, b1) = (vec![-1.0; nb], vec![0.0; nb]);
        let (b, _) = assemble(&ext, &spec, OpData::Robin { alpha: &a1, beta: &b1 }).unwrap();
        let (_, same) = update(&b, &ext, &ext, &spec, OpData::Robin { alpha: &a1, beta: &b1 }).unwrap();
        assert_eq!(same.rows_recomputed, 0);
        let a2 = vec![-2.0; nb];
        let (_, st) = update(&b, &ext, &ext, &spec, OpData::Robin { alpha: &a2, beta: &b1 }).unwrap();
        assert_eq!(st.rows_recomputed, nb);
    }

    #[test]
    fn moving_boundary_recomputes_locally() {
        let h = 0.08;
        let reference = generate_reference_nodes(h, 5).unwrap();
        let m0 = DomainModel::from_seeds(&[ellipse(20, 0.1, 0.2, Point::ZERO)], 0.0).unwrap();
        let m1 = DomainModel::from_seeds(&[ellipse(20, 0.1, 0.2, Point::new(0.01, 0.005))], 0.0).unwrap();
        let e0 = adapt_nodes(&reference, &m0).unwrap().extended();
        let e1 = adapt_nodes(&reference, &m1).unwrap().extended();
        let spec = build_spec(OperatorKind::Laplacian, 2);
        let (l0, _) = assemble(&e0, &spec, OpData::Laplacian).unwrap();
        let (l1, st) = update(&l0, &e0, &e1, &spec, OpData::Laplacian).unwrap();
        assert_eq!(st.rows_copied + st.rows_recomputed, e1.n());
        assert!(st.tau > 0.5, "tau {}", st.tau);
        let vals: Vec<f64> = e1.coords.iter().map(|p| poly(*p).0).collect();
        let lv = l1.matrix.matvec(&vals);
        for (r, &node) in l1.row_nodes.iter().enumerate() {
            let exact = poly(e1.coords[node]).1;
            assert!((lv[r] - exact).abs() <= 1e-7 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn blocks_partition_matrix() {
        let ext = generate_reference_nodes(0.15, 3).unwrap().extended();
        let spec = build_spec(OperatorKind::Laplacian, 2);
        let (l, _) = assemble(&ext, &spec, OpData::Laplacian).unwrap();
        let total: usize = [Part::Interior, Part::Boundary]
            .iter()
            .flat_map(|&r| [Part::Interior, Part::Boundary, Part::Ghost].map(move |c| (r, c)))
            .map(|(r, c)| l.block(r, c).nnz())
            .sum();
        assert_eq!(total, l.matrix.nnz());
        assert_eq!(l.block(Part::Boundary, Part::Ghost).nrows(), ext.n_boundary);
        let mut buf = Vec::new();
        l.write_coo(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), l.matrix.nnz());
    }
}

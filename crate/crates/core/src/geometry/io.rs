//! CSV import and export of node sets and seed lists.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::nodes::{ExtendedSet, NodeSet, Role, OUTER_CURVE};
use crate::point::Point;

#[derive(Serialize, Deserialize)]
struct NodeRow {
    x: f64,
    y: f64,
    role: u8,
}

#[derive(Serialize, Deserialize)]
struct SeedRow {
    x: f64,
    y: f64,
}

/// Write active nodes as `x,y,role` in `[interior, boundary, ghost]` order.
pub fn write_nodes<W: Write>(ext: &ExtendedSet, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for (i, p) in ext.coords.iter().enumerate() {
        out.serialize(NodeRow {
            x: p.x,
            y: p.y,
            role: ext.role(i).code(),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Read an `x,y,role` file. Ghost rows are paired with boundary rows in
/// order of appearance; boundary normals point from each boundary node
/// to its ghost, and the spacing is the mean boundary-ghost distance.
pub fn read_nodes<R: Read>(r: R) -> Result<NodeSet> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    let mut ghost = Vec::new();
    for row in rdr.deserialize() {
        let row: NodeRow = row?;
        let p = Point::new(row.x, row.y);
        match Role::from_code(row.role) {
            Some(Role::Interior) => interior.push(p),
            Some(Role::Boundary) => boundary.push(p),
            Some(Role::Ghost) => ghost.push(p),
            None => return Err(Error::Dimension(format!("unknown node role {}", row.role))),
        }
    }
    if boundary.len() != ghost.len() {
        return Err(Error::Dimension(format!(
            "{} boundary nodes but {} ghosts",
            boundary.len(),
            ghost.len()
        )));
    }
    let h = if boundary.is_empty() {
        1.0
    } else {
        boundary.iter().zip(&ghost).map(|(b, g)| b.dist(*g)).sum::<f64>() / boundary.len() as f64
    };
    let mut set = NodeSet::empty(h);
    for p in interior {
        set.push_interior(p);
    }
    for (b, g) in boundary.into_iter().zip(ghost) {
        set.push_boundary(b, (g - b).normalized(), OUTER_CURVE);
        let gi = set.len() - 1;
        set.coords[gi] = g;
    }
    Ok(set)
}

pub fn write_seeds<W: Write>(seeds: &[Point], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for p in seeds {
        out.serialize(SeedRow { x: p.x, y: p.y })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_seeds<R: Read>(r: R) -> Result<Vec<Point>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize()
        .map(|row| {
            let row: SeedRow = row?;
            Ok(Point::new(row.x, row.y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::nodes::generate_reference_nodes;

    #[test]
    fn node_round_trip() {
        let set = generate_reference_nodes(0.1, 9).unwrap();
        let ext = set.extended();
        let mut buf = Vec::new();
        write_nodes(&ext, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,role\n"));
        assert!(!text.contains('\r'));
        let back = read_nodes(buf.as_slice()).unwrap().extended();
        assert_eq!(back.coords, ext.coords);
        assert_eq!(back.n_boundary, ext.n_boundary);
        assert!((back.h - 0.1).abs() < 1e-12);
        for (a, b) in back.normals.iter().zip(&ext.normals) {
            assert!(a.dist(*b) < 1e-12);
        }
    }

    #[test]
    fn seed_round_trip() {
        let seeds = vec![Point::new(0.1, 0.2), Point::new(-0.3, 0.25)];
        let mut buf = Vec::new();
        write_seeds(&seeds, &mut buf).unwrap();
        assert_eq!(read_seeds(buf.as_slice()).unwrap(), seeds);
    }
}

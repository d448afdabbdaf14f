//! Role-tagged node sets and reference node generation on the unit disk.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Interior = 0,
    Boundary = 1,
    Ghost = 2,
}

impl Role {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Role> {
        match c {
            0 => Some(Role::Interior),
            1 => Some(Role::Boundary),
            2 => Some(Role::Ghost),
            _ => None,
        }
    }
}

/// Marks "no partner" in [`NodeSet::partner`].
pub const NO_PARTNER: usize = usize::MAX;

/// Identifier of the outer boundary in [`NodeSet::curve`].
pub const OUTER_CURVE: usize = 0;

/// Scattered nodes with roles and active flags.
///
/// Boundary node `b` and its ghost `g` reference each other through
/// `partner`. `normals` holds the outward unit normal of the domain for
/// boundary and ghost nodes. `curve` is 0 for the outer boundary and
/// `j + 1` for embedded boundary `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub coords: Vec<Point>,
    pub role: Vec<Role>,
    pub active: Vec<bool>,
    pub normals: Vec<Point>,
    pub partner: Vec<usize>,
    pub curve: Vec<usize>,
    pub h: f64,
}

/// Active nodes reordered as `[interior, boundary, ghost]`, the layout all
/// operators use. Ghost `k` belongs to boundary node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSet {
    pub coords: Vec<Point>,
    pub n_interior: usize,
    pub n_boundary: usize,
    /// Outward normals of the boundary nodes.
    pub normals: Vec<Point>,
    /// Curve id of each boundary node.
    pub curve: Vec<usize>,
    /// Index in the source [`NodeSet`] of every extended node.
    pub source: Vec<usize>,
    pub h: f64,
}

impl ExtendedSet {
    /// `N = N_i + N_b`.
    pub fn n(&self) -> usize {
        self.n_interior + self.n_boundary
    }

    /// `N + N_b`, including ghosts.
    pub fn n_ext(&self) -> usize {
        self.n() + self.n_boundary
    }

    pub fn is_interior(&self, i: usize) -> bool {
        i < self.n_interior
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        i >= self.n_interior && i < self.n()
    }

    pub fn role(&self, i: usize) -> Role {
        if i < self.n_interior {
            Role::Interior
        } else if i < self.n() {
            Role::Boundary
        } else {
            Role::Ghost
        }
    }

    /// Interior and boundary coordinates.
    pub fn domain_points(&self) -> &[Point] {
        &self.coords[..self.n()]
    }

    pub fn boundary_points(&self) -> &[Point] {
        &self.coords[self.n_interior..self.n()]
    }
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn active_with(&self, r: Role) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.active[i] && self.role[i] == r).collect()
    }

    pub fn interior(&self) -> Vec<usize> {
        self.active_with(Role::Interior)
    }

    pub fn boundary(&self) -> Vec<usize> {
        self.active_with(Role::Boundary)
    }

    /// Active ghosts, ordered like their boundary partners.
    pub fn ghost(&self) -> Vec<usize> {
        self.boundary().into_iter().map(|b| self.partner[b]).collect()
    }

    pub fn extended(&self) -> ExtendedSet {
        let xi = self.interior();
        let xb = self.boundary();
        let xg = self.ghost();
        let mut source = Vec::with_capacity(xi.len() + 2 * xb.len());
        source.extend(&xi);
        source.extend(&xb);
        source.extend(&xg);
        ExtendedSet {
            coords: source.iter().map(|&i| self.coords[i]).collect(),
            n_interior: xi.len(),
            n_boundary: xb.len(),
            normals: xb.iter().map(|&i| self.normals[i]).collect(),
            curve: xb.iter().map(|&i| self.curve[i]).collect(),
            source,
            h: self.h,
        }
    }

    /// Append a boundary node and its ghost at distance `h` along `normal`.
    pub fn push_boundary(&mut self, p: Point, normal: Point, curve: usize) {
        let b = self.len();
        let g = b + 1;
        self.coords.push(p);
        self.role.push(Role::Boundary);
        self.active.push(true);
        self.normals.push(normal);
        self.partner.push(g);
        self.curve.push(curve);
        self.coords.push(p + self.h * normal);
        self.role.push(Role::Ghost);
        self.active.push(true);
        self.normals.push(normal);
        self.partner.push(b);
        self.curve.push(curve);
    }

    pub fn push_interior(&mut self, p: Point) {
        self.coords.push(p);
        self.role.push(Role::Interior);
        self.active.push(true);
        self.normals.push(Point::ZERO);
        self.partner.push(NO_PARTNER);
        self.curve.push(NO_PARTNER);
    }

    pub fn empty(h: f64) -> NodeSet {
        NodeSet {
            coords: Vec::new(),
            role: Vec::new(),
            active: Vec::new(),
            normals: Vec::new(),
            partner: Vec::new(),
            curve: Vec::new(),
            h,
        }
    }
}

/// Minimum spacing of interior samples relative to `h`.
pub const POISSON_RADIUS: f64 = 0.8;
const CANDIDATES: usize = 30;

/// Number of boundary nodes on the unit circle at spacing `h`.
pub fn outer_boundary_count(h: f64) -> usize {
    (2.0 * PI / h).round() as usize
}

/// Poisson-disk nodes in the unit disk with equally spaced boundary nodes
/// and ghosts at distance `h` outside.
pub fn generate_reference_nodes(h: f64, seed: u64) -> Result<NodeSet> {
    assert!(h > 0.0 && h < 0.5, "spacing {h} out of range");
    let r = POISSON_RADIUS * h;
    let nb = outer_boundary_count(h);
    let boundary: Vec<Point> = (0..nb)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / nb as f64;
            Point::new(t.cos(), t.sin())
        })
        .collect();

    let cell = r / 2f64.sqrt();
    let lo = -1.0 - 2.0 * r;
    let dim = ((2.0 - 2.0 * lo) / cell).ceil() as usize + 1;
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); dim * dim];
    let cell_of = |p: Point| (((p.x - lo) / cell) as usize, ((p.y - lo) / cell) as usize);
    let mut pts: Vec<Point> = Vec::new();
    let insert = |pts: &mut Vec<Point>, grid: &mut Vec<Vec<usize>>, p: Point| {
        let (cx, cy) = cell_of(p);
        grid[cy * dim + cx].push(pts.len());
        pts.push(p);
    };
    for &b in &boundary {
        insert(&mut pts, &mut grid, b);
    }
    let far_enough = |pts: &[Point], grid: &[Vec<usize>], p: Point| {
        let (cx, cy) = cell_of(p);
        for y in cy.saturating_sub(2)..(cy + 3).min(dim) {
            for x in cx.saturating_sub(2)..(cx + 3).min(dim) {
                for &j in &grid[y * dim + x] {
                    if pts[j].dist_sq(p) < r * r {
                        return false;
                    }
                }
            }
        }
        true
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut active: Vec<usize> = (0..nb).collect();
    let start = Point::new(rng.gen_range(-0.5..0.5) * h, rng.gen_range(-0.5..0.5) * h);
    active.push(pts.len());
    insert(&mut pts, &mut grid, start);
    while !active.is_empty() {
        let k = rng.gen_range(0..active.len());
        let base = pts[active[k]];
        let mut found = false;
        for _ in 0..CANDIDATES {
            let rad = r * (1.0 + 3.0 * rng.gen::<f64>()).sqrt();
            let ang = 2.0 * PI * rng.gen::<f64>();
            let p = base + Point::new(rad * ang.cos(), rad * ang.sin());
            if p.norm_sq() >= 1.0 {
                continue;
            }
            if far_enough(&pts, &grid, p) {
                active.push(pts.len());
                insert(&mut pts, &mut grid, p);
                found = true;
                break;
            }
        }
        if !found {
            active.swap_remove(k);
        }
    }

    let interior = &pts[nb..];
    let needed = (0.5 * PI / (h * h)) as usize;
    if interior.len() < needed {
        return Err(Error::NodeGeneration {
            achieved: interior.len(),
            target: needed,
        });
    }
    let mut set = NodeSet::empty(h);
    for &p in interior {
        set.push_interior(p);
    }
    for b in boundary {
        set.push_boundary(b, b, OUTER_CURVE);
    }
    Ok(set)
}

/// Spacing whose reference node set has about `n_target` interior plus
/// boundary nodes.
pub fn spacing_for_target(n_target: usize, seed: u64) -> Result<f64> {
    let mut h = (3.42 / n_target as f64).sqrt();
    for _ in 0..6 {
        let set = generate_reference_nodes(h, seed)?;
        let n = set.extended().n();
        let ratio = n as f64 / n_target as f64;
        if (ratio - 1.0).abs() < 0.01 {
            break;
        }
        h *= ratio.sqrt();
    }
    Ok(h)
}

//! k-d tree over 2D points and nearest-neighbour stencil selection.

use crate::error::{Error, Result};
use crate::point::Point;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Balanced 2D k-d tree. Queries return original point indices.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[Point]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.split(0, points.len());
        }
        tree
    }

    fn split(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for &i in &self.order[start..end] {
            let p = self.points[i];
            lo[0] = lo[0].min(p.x);
            lo[1] = lo[1].min(p.y);
            hi[0] = hi[0].max(p.x);
            hi[1] = hi[1].max(p.y);
        }
        let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts[a].coord(axis).total_cmp(&pts[b].coord(axis)).then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]].coord(axis);
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.split(start, mid);
        let right = self.split(mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// The `k` nearest points to `p`, sorted by distance with ties broken by
    /// ascending index. Returns fewer than `k` only when the tree is smaller.
    pub fn query(&self, p: Point, k: usize) -> Vec<usize> {
        self.query_with_dist(p, k).into_iter().map(|(_, i)| i).collect()
    }

    /// Like [`KdTree::query`] but also returns squared distances.
    pub fn query_with_dist(&self, p: Point, k: usize) -> Vec<(f64, usize)> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.search(0, p, k, &mut best);
        best
    }

    /// Nearest point, ties to the lower index.
    pub fn nearest(&self, p: Point) -> Option<usize> {
        self.query(p, 1).first().copied()
    }

    fn search(&self, id: usize, p: Point, k: usize, best: &mut Vec<(f64, usize)>) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = (p.dist_sq(self.points[i]), i);
                    if best.len() == k {
                        let worst = best[k - 1];
                        if cmp_pair(&cand, &worst).is_ge() {
                            continue;
                        }
                    }
                    let pos = best.partition_point(|b| cmp_pair(b, &cand).is_lt());
                    best.insert(pos, cand);
                    best.truncate(k);
                }
            }
            Node::Split { axis, value, left, right } => {
                let d = p.coord(axis) - value;
                let (near, far) = if d < 0.0 { (left, right) } else { (right, left) };
                self.search(near, p, k, best);
                // `<=` so that equal-distance points on the far side are still
                // visited for the index tie-break.
                if best.len() < k || d * d <= best[best.len() - 1].0 {
                    self.search(far, p, k, best);
                }
            }
        }
    }
}

fn cmp_pair(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// A center node and its stencil, center first.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub center: usize,
    pub neighbors: Vec<usize>,
}

/// Center plus its `n - 1` nearest neighbours from `tree`.
pub fn make_stencil(tree: &KdTree, center: usize, n: usize) -> Result<Stencil> {
    if n > tree.len() {
        return Err(Error::TooFewNodes {
            needed: n,
            available: tree.len(),
        });
    }
    let p = tree.points()[center];
    let mut neighbors = Vec::with_capacity(n);
    neighbors.push(center);
    // A coincident point with a lower index could otherwise displace the
    // center; ask for one extra and drop the center wherever it lands.
    for i in tree.query(p, n) {
        if i != center && neighbors.len() < n {
            neighbors.push(i);
        }
    }
    if neighbors.len() < n {
        for i in tree.query(p, n + 1) {
            if i != center && !neighbors.contains(&i) && neighbors.len() < n {
                neighbors.push(i);
            }
        }
    }
    Ok(Stencil { center, neighbors })
}

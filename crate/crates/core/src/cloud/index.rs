//! Static 3-d tree for exact nearest-neighbour queries.
//!
//! Ties on distance are broken by the lowest point index, so results are
//! identical to an exhaustive scan that keeps the first minimum.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::PointCloud;
use crate::{Error, Result};

const LEAF_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl Neighbor {
    fn precedes(&self, other: &Neighbor) -> bool {
        (self.dist2, self.index) < (other.dist2, other.index)
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug)]
pub struct NeighborIndex {
    points: Vec<[f64; 3]>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl NeighborIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        cloud.ensure_nonempty()?;
        Self::from_positions(cloud.positions().collect())
    }

    pub fn from_positions(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        build_node(&points, &mut order, 0, &mut nodes);
        Ok(Self { points, order, nodes })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, index: usize) -> [f64; 3] {
        self.points[index]
    }

    pub fn nearest(&self, query: [f64; 3]) -> Neighbor {
        let mut best = Neighbor {
            index: usize::MAX,
            dist2: f64::INFINITY,
        };
        self.nearest_in(0, &query, &mut best);
        best
    }

    /// The `k` nearest points sorted by (distance, index). Returns fewer when
    /// the index holds fewer than `k` points.
    pub fn k_nearest(&self, query: [f64; 3], k: usize) -> Vec<Neighbor> {
        let mut found = Vec::with_capacity(k + 1);
        if k > 0 {
            self.knn_in(0, &query, k, &mut found);
        }
        found
    }

    fn nearest_in(&self, node: usize, q: &[f64; 3], best: &mut Neighbor) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let cand = Neighbor {
                        index: i as usize,
                        dist2: dist2(&self.points[i as usize], q),
                    };
                    if cand.precedes(best) {
                        *best = cand;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_in(near as usize, q, best);
                if diff * diff <= best.dist2 {
                    self.nearest_in(far as usize, q, best);
                }
            }
        }
    }

    fn knn_in(&self, node: usize, q: &[f64; 3], k: usize, found: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let cand = Neighbor {
                        index: i as usize,
                        dist2: dist2(&self.points[i as usize], q),
                    };
                    if found.len() == k && !cand.precedes(&found[k - 1]) {
                        continue;
                    }
                    let at = found.partition_point(|n| n.precedes(&cand));
                    found.insert(at, cand);
                    found.truncate(k);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_in(near as usize, q, k, found);
                if found.len() < k || diff * diff <= found[k - 1].dist2 {
                    self.knn_in(far as usize, q, k, found);
                }
            }
        }
    }
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn build_node(points: &[[f64; 3]], order: &mut [u32], offset: usize, nodes: &mut Vec<Node>) -> u32 {
    let id = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + order.len()) as u32,
        });
        return id;
    }
    // split on the widest axis
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        let p = &points[i as usize];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).partial_cmp(&(hi[b] - lo[b])).unwrap_or(Ordering::Equal))
        .unwrap_or(0);
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .partial_cmp(&points[b as usize][axis])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let value = points[order[mid] as usize][axis];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (left_slice, right_slice) = order.split_at_mut(mid);
    let left = build_node(points, left_slice, offset, nodes);
    let right = build_node(points, right_slice, offset + mid, nodes);
    nodes[id as usize] = Node::Split {
        axis: axis as u8,
        value,
        left,
        right,
    };
    id
}

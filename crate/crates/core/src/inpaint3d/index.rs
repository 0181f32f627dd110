//! Static kd-tree for k-nearest-neighbor and radius queries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::mesh::Vec3;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Caller-side index of the point.
    pub index: u32,
    pub distance: f64,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { left: usize, right: usize },
}

/// Balanced kd-tree over a subset of points. Results are ordered by
/// ascending distance, ties broken by ascending caller index.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<[f64; 3]>,
    ids: Vec<u32>,
    nodes: Vec<Node>,
    /// Axis-aligned bounds of each node's points.
    bounds: Vec<[[f64; 3]; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    index: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SpatialIndex {
    /// Indexes `positions[i]` for every `i` in `subset`.
    pub fn from_subset(positions: &[Vec3], subset: &[u32]) -> Self {
        let mut entries: Vec<([f64; 3], u32)> = subset
            .iter()
            .map(|&i| {
                let p = positions[i as usize];
                ([p.x, p.y, p.z], i)
            })
            .collect();
        let mut nodes = Vec::new();
        let mut bounds = Vec::new();
        if !entries.is_empty() {
            build(&mut entries, 0, &mut nodes, &mut bounds);
        }
        SpatialIndex {
            points: entries.iter().map(|e| e.0).collect(),
            ids: entries.iter().map(|e| e.1).collect(),
            nodes,
            bounds,
        }
    }

    pub fn from_points(positions: &[Vec3]) -> Self {
        let all: Vec<u32> = (0..positions.len() as u32).collect();
        Self::from_subset(positions, &all)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// The `min(k, len)` nearest points to `query`.
    pub fn nearest(&self, query: Vec3, k: usize) -> Vec<Neighbor> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let q = [query.x, query.y, query.z];
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn(0, &q, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.d2.sqrt(),
            })
            .collect()
    }

    /// Every point within `radius` of `query` (inclusive).
    pub fn within(&self, query: Vec3, radius: f64) -> Vec<Neighbor> {
        let mut out: Vec<Candidate> = Vec::new();
        if self.is_empty() || !(radius >= 0.0) {
            return Vec::new();
        }
        let q = [query.x, query.y, query.z];
        self.radius(0, &q, radius * radius, &mut out);
        out.sort();
        out.into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.d2.sqrt(),
            })
            .collect()
    }

    fn knn(&self, node: usize, q: &[f64; 3], k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for i in start..end {
                    let c = Candidate {
                        d2: dist2(&self.points[i], q),
                        index: self.ids[i],
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { left, right } => {
                let (dl, dr) = (self.box_dist2(left, q), self.box_dist2(right, q));
                let order = if dl <= dr { [(left, dl), (right, dr)] } else { [(right, dr), (left, dl)] };
                for (child, d2) in order {
                    // `<=` keeps equal-distance points with smaller indices reachable.
                    if heap.len() < k || d2 <= heap.peek().unwrap().d2 {
                        self.knn(child, q, k, heap);
                    }
                }
            }
        }
    }

    fn radius(&self, node: usize, q: &[f64; 3], r2: f64, out: &mut Vec<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for i in start..end {
                    let d2 = dist2(&self.points[i], q);
                    if d2 <= r2 {
                        out.push(Candidate {
                            d2,
                            index: self.ids[i],
                        });
                    }
                }
            }
            Node::Split { left, right } => {
                for child in [left, right] {
                    if self.box_dist2(child, q) <= r2 {
                        self.radius(child, q, r2, out);
                    }
                }
            }
        }
    }

    fn box_dist2(&self, node: usize, q: &[f64; 3]) -> f64 {
        let [lo, hi] = &self.bounds[node];
        (0..3)
            .map(|a| {
                let d = (lo[a] - q[a]).max(q[a] - hi[a]).max(0.0);
                d * d
            })
            .sum()
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}

/// Builds the subtree for `entries` (a contiguous slice of the final
/// point order starting at `offset`) and returns its node index.
fn build(
    entries: &mut [([f64; 3], u32)],
    offset: usize,
    nodes: &mut Vec<Node>,
    bounds: &mut Vec<[[f64; 3]; 2]>,
) -> usize {
    let id = nodes.len();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for (p, _) in entries.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    bounds.push([lo, hi]);
    if entries.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + entries.len(),
        });
        return id;
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
        .unwrap();
    let mid = entries.len() / 2;
    entries.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]).then(a.1.cmp(&b.1)));
    // Placeholder until children exist.
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (l, r) = entries.split_at_mut(mid);
    let left = build(l, offset, nodes, bounds);
    let right = build(r, offset + mid, nodes, bounds);
    nodes[id] = Node::Split { left, right };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[Vec3], subset: &[u32], q: Vec3, k: usize) -> Vec<(f64, u32)> {
        let mut all: Vec<(f64, u32)> = subset
            .iter()
            .map(|&i| ((points[i as usize] - q).norm_squared(), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.truncate(k);
        all
    }

    proptest! {
        #[test]
        fn knn_matches_brute_force(
            raw in prop::collection::vec((-4i32..4, -4i32..4, -4i32..4), 1..300),
            q in (-5i32..5, -5i32..5, -5i32..5),
            k in 1usize..20,
            stride in 1usize..4,
        ) {
            // Integer lattice coordinates produce many exact distance ties.
            let points: Vec<Vec3> = raw.iter()
                .map(|&(x, y, z)| Vec3::new(x as f64, y as f64, z as f64) * 0.5)
                .collect();
            let subset: Vec<u32> = (0..points.len() as u32).step_by(stride).collect();
            let index = SpatialIndex::from_subset(&points, &subset);
            let q = Vec3::new(q.0 as f64, q.1 as f64, q.2 as f64) * 0.5;
            let got: Vec<(f64, u32)> = index
                .nearest(q, k)
                .iter()
                .map(|n| (n.distance * n.distance, n.index))
                .collect();
            let want = brute(&points, &subset, q, k);
            prop_assert_eq!(got.len(), want.len().min(k));
            for (g, w) in got.iter().zip(&want) {
                prop_assert_eq!(g.1, w.1);
                prop_assert!((g.0 - w.0).abs() < 1e-12);
            }
        }

        #[test]
        fn radius_matches_brute_force(
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..200),
            r in 0.0f64..1.0,
        ) {
            let points: Vec<Vec3> = raw.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect();
            let index = SpatialIndex::from_points(&points);
            let got: Vec<u32> = index.within(Vec3::zeros(), r).iter().map(|n| n.index).collect();
            let mut want: Vec<(f64, u32)> = points.iter().enumerate()
                .map(|(i, p)| (p.norm_squared(), i as u32))
                .filter(|(d2, _)| *d2 <= r * r)
                .collect();
            want.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            prop_assert_eq!(got, want.iter().map(|w| w.1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn returns_min_k_len() {
        let pts = vec![Vec3::zeros(), Vec3::x()];
        let index = SpatialIndex::from_points(&pts);
        assert_eq!(index.nearest(Vec3::zeros(), 5).len(), 2);
        assert!(SpatialIndex::from_subset(&pts, &[]).nearest(Vec3::zeros(), 3).is_empty());
    }

    #[test]
    fn coincident_points_tie_by_index() {
        let pts = vec![Vec3::x(); 40];
        let index = SpatialIndex::from_points(&pts);
        let got: Vec<u32> = index.nearest(Vec3::zeros(), 5).iter().map(|n| n.index).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
    }
}

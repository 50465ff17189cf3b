//! Exact k-nearest-neighbor search. Results are ordered by
//! `(squared distance, index)`, so ties always resolve to the lower index and
//! the tree returns exactly what an exhaustive scan returns.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::points::{dist2, PointCloud};

const LEAF_SIZE: usize = 12;
/// Above this dimension a tree prunes almost nothing; scan instead.
const MAX_TREE_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl Neighbor {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key(other)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Exact neighbor index over a borrowed point cloud.
#[derive(Debug, Clone)]
pub struct NeighborIndex<'a> {
    points: &'a PointCloud,
    tree: Option<Tree>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a PointCloud) -> Self {
        let tree =
            (points.dim() <= MAX_TREE_DIM && points.len() > LEAF_SIZE).then(|| build(points));
        NeighborIndex { points, tree }
    }

    /// Exhaustive-scan index; mostly useful as a reference.
    pub fn brute_force(points: &'a PointCloud) -> Self {
        NeighborIndex { points, tree: None }
    }

    pub fn points(&self) -> &PointCloud {
        self.points
    }

    /// The `k` admissible points closest to `query`, nearest first. Fewer are
    /// returned only if fewer points are admissible.
    pub fn knn_point<F>(&self, query: &[f64], k: usize, admissible: F) -> Vec<Neighbor>
    where
        F: Fn(usize) -> bool,
    {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        match &self.tree {
            Some(tree) => self.search(tree, 0, query, k, &admissible, &mut heap),
            None => {
                for j in 0..self.points.len() {
                    if admissible(j) {
                        offer(
                            &mut heap,
                            k,
                            Neighbor {
                                index: j,
                                dist2: dist2(query, self.points.row(j)),
                            },
                        );
                    }
                }
            }
        }
        heap.into_sorted_vec()
    }

    /// Neighbors of stored point `i`, skipping `|j - i| <= theiler`.
    pub fn knn_index(&self, i: usize, k: usize, theiler: usize) -> Vec<Neighbor> {
        self.knn_point(self.points.row(i), k, |j| j.abs_diff(i) > theiler)
    }

    /// Number of admissible points within squared radius `r2` (inclusive).
    pub fn count_within<F>(&self, query: &[f64], r2: f64, admissible: F) -> usize
    where
        F: Fn(usize) -> bool,
    {
        match &self.tree {
            Some(tree) => self.count(tree, 0, query, r2, &admissible),
            None => (0..self.points.len())
                .filter(|&j| admissible(j) && dist2(query, self.points.row(j)) <= r2)
                .count(),
        }
    }

    fn search<F>(
        &self,
        tree: &Tree,
        node: usize,
        q: &[f64],
        k: usize,
        ok: &F,
        heap: &mut BinaryHeap<Neighbor>,
    ) where
        F: Fn(usize) -> bool,
    {
        match tree.nodes[node] {
            Node::Leaf { start, end } => {
                for &j in &tree.order[start..end] {
                    if ok(j) {
                        offer(
                            heap,
                            k,
                            Neighbor {
                                index: j,
                                dist2: dist2(q, self.points.row(j)),
                            },
                        );
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(tree, near, q, k, ok, heap);
                // Equal bounds must still be visited: a tie may carry a lower index.
                let bound = diff * diff;
                if heap.len() < k || heap.peek().is_some_and(|w| bound <= w.dist2) {
                    self.search(tree, far, q, k, ok, heap);
                }
            }
        }
    }

    fn count<F>(&self, tree: &Tree, node: usize, q: &[f64], r2: f64, ok: &F) -> usize
    where
        F: Fn(usize) -> bool,
    {
        match tree.nodes[node] {
            Node::Leaf { start, end } => tree.order[start..end]
                .iter()
                .filter(|&&j| ok(j) && dist2(q, self.points.row(j)) <= r2)
                .count(),
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                let mut n = self.count(tree, near, q, r2, ok);
                if diff * diff <= r2 {
                    n += self.count(tree, far, q, r2, ok);
                }
                n
            }
        }
    }
}

fn offer(heap: &mut BinaryHeap<Neighbor>, k: usize, cand: Neighbor) {
    if heap.len() < k {
        heap.push(cand);
    } else if heap.peek().is_some_and(|w| cand < *w) {
        heap.pop();
        heap.push(cand);
    }
}

fn build(points: &PointCloud) -> Tree {
    let mut tree = Tree {
        order: (0..points.len()).collect(),
        nodes: Vec::new(),
    };
    split(points, &mut tree, 0, points.len());
    tree
}

fn split(points: &PointCloud, tree: &mut Tree, start: usize, end: usize) -> usize {
    let id = tree.nodes.len();
    if end - start <= LEAF_SIZE {
        tree.nodes.push(Node::Leaf { start, end });
        return id;
    }
    let dim = (0..points.dim())
        .max_by(|&a, &b| {
            spread(points, &tree.order[start..end], a).total_cmp(&spread(
                points,
                &tree.order[start..end],
                b,
            ))
        })
        .unwrap_or(0);
    let mid = start + (end - start) / 2;
    tree.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        points.row(a)[dim]
            .total_cmp(&points.row(b)[dim])
            .then(a.cmp(&b))
    });
    let value = points.row(tree.order[mid])[dim];
    tree.nodes.push(Node::Leaf { start: 0, end: 0 });
    let left = split(points, tree, start, mid);
    let right = split(points, tree, mid, end);
    tree.nodes[id] = Node::Split {
        dim,
        value,
        left,
        right,
    };
    id
}

fn spread(points: &PointCloud, idx: &[usize], dim: usize) -> f64 {
    let (lo, hi) = idx
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            let v = points.row(i)[dim];
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(n: usize, dim: usize, seed: u64, grid: bool) -> PointCloud {
        let mut rng = crate::rng::seeded(seed);
        let data = (0..n * dim)
            .map(|_| {
                if grid {
                    rng.random_range(0..4) as f64
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        PointCloud::new(data, dim).unwrap()
    }

    fn exhaustive(
        points: &PointCloud,
        q: &[f64],
        k: usize,
        ok: impl Fn(usize) -> bool,
    ) -> Vec<Neighbor> {
        let mut all: Vec<Neighbor> = (0..points.len())
            .filter(|&j| ok(j))
            .map(|j| Neighbor {
                index: j,
                dist2: dist2(q, points.row(j)),
            })
            .collect();
        all.sort();
        all.truncate(k);
        all
    }

    #[test]
    fn matches_scan_with_heavy_ties() {
        // Integer grid coordinates produce many exactly equal distances.
        for seed in 0..20 {
            let pts = cloud(300, 3, seed, true);
            let index = NeighborIndex::new(&pts);
            for i in (0..300).step_by(7) {
                let got = index.knn_index(i, 8, 3);
                let want = exhaustive(&pts, pts.row(i), 8, |j| j.abs_diff(i) > 3);
                assert_eq!(got, want, "seed {seed}, query {i}");
            }
        }
    }

    #[test]
    fn counts_match_scan() {
        let pts = cloud(500, 2, 3, false);
        let index = NeighborIndex::new(&pts);
        for i in (0..500).step_by(13) {
            let r2 = 0.01;
            let want = (0..500).filter(|&j| pts.dist2(i, j) <= r2).count();
            assert_eq!(index.count_within(pts.row(i), r2, |_| true), want);
        }
    }

    #[test]
    fn high_dimension_falls_back_to_scan() {
        let pts = cloud(50, 40, 1, false);
        let index = NeighborIndex::new(&pts);
        let got = index.knn_index(10, 3, 0);
        assert_eq!(got, exhaustive(&pts, pts.row(10), 3, |j| j != 10));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn tree_equals_exhaustive_scan(
            n in 20usize..500,
            dim in 1usize..6,
            seed in any::<u64>(),
            k in 1usize..10,
            w in 0usize..5,
            grid in any::<bool>(),
        ) {
            let pts = cloud(n, dim, seed, grid);
            let index = NeighborIndex::new(&pts);
            let q = seed as usize % n;
            let got = index.knn_index(q, k, w);
            let want = exhaustive(&pts, pts.row(q), k, |j| j.abs_diff(q) > w);
            prop_assert_eq!(got, want);
        }
    }
}

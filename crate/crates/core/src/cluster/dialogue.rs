//! Dialogue-based clustering: process edges in descending weight and merge
//! the endpoint sets whenever the merged set's average internal edge weight
//! stays above `rho_d`.
//!
//! The union-find structure carries, per root, the member list and the exact
//! sum of stored edge weights inside the set. Cross-set weight for a
//! candidate merge is computed by scanning the incident edges of the smaller
//! side's members, so the density test matches the full-rescan definition
//! exactly.

use super::Partition;
use crate::sag::Sag;

/// Average internal edge weight of the union of two disjoint sets:
/// `(sum1 + sum2 + cross) / (k(k-1)/2)` with `k` the combined size.
pub fn union_density(sum1: f64, size1: usize, sum2: f64, size2: usize, cross: f64) -> f64 {
    let k = size1 + size2;
    debug_assert!(k >= 2, "union of disjoint sets has at least two members");
    let pairs = (k * (k - 1) / 2) as f64;
    (sum1 + sum2 + cross) / pairs
}

/// Union-find over comment ids with per-root size, internal weight sum, and
/// member list for cross-edge scans.
#[derive(Debug)]
pub struct DisjointSets {
    parent: Vec<usize>,
    /// Root-indexed; meaningless for non-roots.
    size: Vec<usize>,
    internal_weight: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
            internal_weight: vec![0.0; n],
            members: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            self.parent[root] = self.parent[self.parent[root]];
            root = self.parent[root];
        }
        root
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }

    pub fn internal_weight_of(&mut self, x: usize) -> f64 {
        let r = self.find(x);
        self.internal_weight[r]
    }

    pub fn members_of(&mut self, x: usize) -> &[usize] {
        let r = self.find(x);
        &self.members[r]
    }

    /// Total weight of stored edges with one endpoint in each of the two
    /// distinct sets, found by scanning the smaller side's adjacency.
    pub fn cross_weight(&mut self, sag: &Sag, a: usize, b: usize) -> f64 {
        let ra = self.find(a);
        let rb = self.find(b);
        debug_assert_ne!(ra, rb);
        let (small, other) = if self.size[ra] <= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        let mut cross = 0.0;
        // Borrow juggling: member list is read while find() mutates parents,
        // so walk a clone of the indices.
        for i in 0..self.members[small].len() {
            let node = self.members[small][i];
            for edge_idx in sag.incident_edges(node) {
                let e = sag.edge(edge_idx);
                let peer = if e.x == node { e.y } else { e.x };
                if self.find(peer) == other {
                    cross += e.w;
                }
            }
        }
        cross
    }

    /// Merge the sets of `a` and `b`, absorbing the smaller member list into
    /// the larger. `cross` must be the value returned by [`Self::cross_weight`].
    pub fn union(&mut self, a: usize, b: usize, cross: f64) {
        let ra = self.find(a);
        let rb = self.find(b);
        debug_assert_ne!(ra, rb);
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.internal_weight[big] += self.internal_weight[small] + cross;
        let moved = std::mem::take(&mut self.members[small]);
        self.members[big].extend(moved);
    }

    /// Final labels: each comment's root id.
    pub fn labels(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|i| self.find(i)).collect()
    }
}

/// Edge indices sorted by descending weight, ties by ascending `(x, y)`.
pub(crate) fn sorted_edge_order(sag: &Sag) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sag.m()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (sag.edge(i), sag.edge(j));
        b.w.total_cmp(&a.w).then(a.x.cmp(&b.x)).then(a.y.cmp(&b.y))
    });
    order
}

pub fn cluster_dialogue(sag: &Sag, rho_d: f64) -> Partition {
    let mut dsu = DisjointSets::new(sag.n());
    for edge_idx in sorted_edge_order(sag) {
        let e = sag.edge(edge_idx);
        if dsu.find(e.x) == dsu.find(e.y) {
            continue;
        }
        let cross = dsu.cross_weight(sag, e.x, e.y);
        let density = union_density(
            dsu.internal_weight_of(e.x),
            dsu.size_of(e.x),
            dsu.internal_weight_of(e.y),
            dsu.size_of(e.y),
            cross,
        );
        if density > rho_d {
            dsu.union(e.x, e.y, cross);
            debug_assert!({
                let r = dsu.find(e.x);
                let k = dsu.size[r] as f64;
                dsu.internal_weight[r] / (k * (k - 1.0) / 2.0) > rho_d
            });
        }
    }
    Partition::from_labels(&dsu.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sag::{Edge, Sag};
    use rand::{Rng, SeedableRng};

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> Sag {
        Sag::new(
            n,
            edges.iter().map(|&(x, y, w)| Edge { x, y, w }).collect(),
        )
    }

    #[test]
    fn union_density_examples() {
        // two singletons joined by one edge
        assert_eq!(union_density(0.0, 1, 0.0, 1, 0.8), 0.8);
        // pair with internal sum 0.9 plus a singleton, cross 0.5:
        // (0.9 + 0.5) / C(3,2) = 1.4 / 3
        let d = union_density(0.9, 2, 0.0, 1, 0.5);
        assert!((d - 0.4666666666666666).abs() < 1e-15);
        // no internal edges at all
        assert_eq!(union_density(0.0, 1, 0.0, 1, 0.0), 0.0);
    }

    #[test]
    fn two_comments_merge_above_threshold() {
        let sag = graph(2, &[(0, 1, 0.9)]);
        let p = cluster_dialogue(&sag, 0.34);
        assert_eq!(p.num_topics(), 1);
        assert_eq!(p.topics[0], vec![0, 1]);
    }

    #[test]
    fn two_comments_stay_apart_below_threshold() {
        let sag = graph(2, &[(0, 1, 0.2)]);
        let p = cluster_dialogue(&sag, 0.34);
        assert_eq!(p.num_topics(), 2);
    }

    #[test]
    fn density_counts_all_internal_pairs() {
        // Triangle 0-1-2 where the third edge is weak: merging 0,1 happens at
        // density 0.9; adding 2 needs (0.9+0.6+0.05)/3 = 0.517 > 0.5.
        let sag = graph(3, &[(0, 1, 0.9), (1, 2, 0.6), (0, 2, 0.05)]);
        let p = cluster_dialogue(&sag, 0.5);
        assert_eq!(p.num_topics(), 1);

        // With rho over that density the third comment is left out.
        let p = cluster_dialogue(&sag, 0.52);
        assert_eq!(
            p.canonical_sets(),
            vec![vec![0, 1], vec![2]]
        );
    }

    #[test]
    fn isolated_comments_become_singletons() {
        let sag = graph(4, &[(0, 1, 0.9)]);
        let p = cluster_dialogue(&sag, 0.34);
        assert_eq!(p.num_topics(), 3);
        assert_eq!(p.canonical_sets(), vec![vec![0, 1], vec![2], vec![3]]);
    }

    /// Naive re-scan oracle: same edge order, but the union density is
    /// recomputed by scanning the full edge list against a plain label array.
    pub(crate) fn oracle_cluster(sag: &Sag, rho_d: f64) -> Partition {
        let mut labels: Vec<usize> = (0..sag.n()).collect();
        for edge_idx in sorted_edge_order(sag) {
            let e = sag.edge(edge_idx);
            let (la, lb) = (labels[e.x], labels[e.y]);
            if la == lb {
                continue;
            }
            let mut sum = 0.0;
            for other in sag.edges() {
                let (lx, ly) = (labels[other.x], labels[other.y]);
                if (lx == la || lx == lb) && (ly == la || ly == lb) {
                    sum += other.w;
                }
            }
            let k = labels.iter().filter(|&&l| l == la || l == lb).count();
            let density = sum / ((k * (k - 1)) as f64 / 2.0);
            if density > rho_d {
                for l in labels.iter_mut() {
                    if *l == lb {
                        *l = la;
                    }
                }
            }
        }
        Partition::from_labels(&labels)
    }

    pub(crate) fn random_graph(rng: &mut impl Rng, max_n: usize) -> Sag {
        let n = rng.gen_range(2..=max_n);
        let mut edges = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push(Edge {
                        x,
                        y,
                        w: rng.gen_range(0.01..=1.0),
                    });
                }
            }
        }
        Sag::new(n, edges)
    }

    #[test]
    fn matches_rescan_oracle_on_random_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let sag = random_graph(&mut rng, 12);
            let rho = rng.gen_range(0.1..0.7);
            let fast = cluster_dialogue(&sag, rho);
            let slow = oracle_cluster(&sag, rho);
            assert!(
                fast.same_grouping(&slow),
                "divergence on n={} m={} rho={rho}",
                sag.n(),
                sag.m()
            );
        }
    }

    #[test]
    fn deterministic_under_tie_break() {
        // Identical weights force the (x, y) tie-break.
        let sag = graph(4, &[(0, 1, 0.5), (2, 3, 0.5), (1, 2, 0.5)]);
        let a = cluster_dialogue(&sag, 0.34);
        let b = cluster_dialogue(&sag, 0.34);
        assert_eq!(a, b);
        // (0,1) merges first, then (1,2) is tested against the triple's
        // density (0.5+0.5)/3 = 0.33 < rho: rejected; (2,3) merges.
        assert_eq!(a.canonical_sets(), vec![vec![0, 1], vec![2, 3]]);
    }
}

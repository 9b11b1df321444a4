//! Topic-center clustering: best-first agglomeration of topic sets by the
//! affinity of their centroids, with a greedy rejection of dominated pairs.
//!
//! Every set is immutable once created; a merge kills its two inputs and
//! allocates a fresh set id, so a queued pair is valid exactly while both of
//! its set ids are still alive. Each live set caches its best partner
//! (`match_i`, `maxval_i`); caches are kept exact after every merge by
//! re-matching the sets whose partner died and by checking every survivor
//! against the newly created set. The greedy rule skips pushing a pair that
//! is dominated by its partner's own best value; such pairs are parked and
//! re-tested when that best value drops, which is the only event that can
//! make them the front of the queue.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::Partition;
use crate::corpus::Comment;
use crate::embedding::{cosine, SentenceVector};
use crate::sag::{decay, Params};

/// A cluster of comments with cached centroid and time attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicSet {
    pub members: Vec<usize>,
    /// Mean sentence vector of the members.
    pub center: Vec<f64>,
    /// Earliest member timestamp.
    pub st: f64,
    /// Mean member timestamp.
    pub ct: f64,
}

impl TopicSet {
    pub fn singleton(id: usize, t: f64, vector: &SentenceVector) -> Self {
        TopicSet {
            members: vec![id],
            center: vector.values.clone(),
            st: t,
            ct: t,
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Set-pair affinity: centroid cosine decayed by the gap between the second
/// set's center time and the first set's start time. Asymmetric in general.
pub fn affinity(a: &TopicSet, b: &TopicSet, gamma_t: f64) -> f64 {
    cosine(&a.center, &b.center) * decay((b.ct - a.st).abs(), gamma_t)
}

/// Merge two disjoint sets: size-weighted centroid and center time, earliest
/// start time, concatenated members.
pub fn merge_sets(a: &TopicSet, b: &TopicSet) -> TopicSet {
    debug_assert!(a.members.iter().all(|m| !b.members.contains(m)));
    let sa = a.size() as f64;
    let sb = b.size() as f64;
    let total = sa + sb;
    let center = a
        .center
        .iter()
        .zip(&b.center)
        .map(|(x, y)| (x * sa + y * sb) / total)
        .collect();
    let mut members = a.members.clone();
    members.extend(&b.members);
    TopicSet {
        members,
        center,
        st: a.st.min(b.st),
        ct: (a.ct * sa + b.ct * sb) / total,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClusterTopicOptions {
    /// Skip pushing pairs dominated by their partner's own best value.
    pub greedy_rejection: bool,
    /// Record the ordered merge list.
    pub record_trace: bool,
}

impl Default for ClusterTopicOptions {
    fn default() -> Self {
        ClusterTopicOptions {
            greedy_rejection: true,
            record_trace: false,
        }
    }
}

/// One executed merge, by set id. Initial singletons are sets `0..n`; merged
/// sets take fresh ids in creation order.
#[derive(Debug, Clone, Serialize)]
pub struct MergeStep {
    pub first: usize,
    pub second: usize,
    pub affinity: f64,
    pub merged: usize,
}

#[derive(Debug, Clone, Default)]
pub struct TopicStats {
    pub pushes: usize,
    pub merges: usize,
}

#[derive(Debug)]
pub struct TopicClustering {
    pub partition: Partition,
    pub trace: Vec<MergeStep>,
    pub stats: TopicStats,
}

/// Queued candidate pair `(i, match_i)`. Max-heap order: highest value first,
/// ties by smallest `(i, j)`.
#[derive(Debug)]
struct PairEntry {
    val: f64,
    i: usize,
    j: usize,
}

impl PartialEq for PairEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for PairEntry {}
impl PartialOrd for PairEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PairEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.val
            .total_cmp(&other.val)
            .then_with(|| other.i.cmp(&self.i))
            .then_with(|| other.j.cmp(&self.j))
    }
}

struct AgglomerationState {
    sets: Vec<Option<TopicSet>>,
    /// Cached best partner and its affinity, per live set.
    matches: Vec<Option<(usize, f64)>>,
    /// Sets whose push was greedily rejected, keyed by the dominating
    /// partner; re-tested when that partner's best value is refreshed.
    pending: Vec<Vec<usize>>,
    queue: BinaryHeap<PairEntry>,
    gamma_t: f64,
    rho_c: f64,
    greedy: bool,
    stats: TopicStats,
}

impl AgglomerationState {
    fn alive(&self, id: usize) -> bool {
        self.sets[id].is_some()
    }

    fn set(&self, id: usize) -> &TopicSet {
        self.sets[id].as_ref().expect("live set")
    }

    /// Best live partner of `i`: maximum affinity, ties to the smallest id.
    fn best_match(&self, i: usize) -> Option<(usize, f64)> {
        let origin = self.set(i);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.sets.len() {
            if j == i || !self.alive(j) {
                continue;
            }
            let val = affinity(origin, self.set(j), self.gamma_t);
            if best.map_or(true, |(_, b)| val > b) {
                best = Some((j, val));
            }
        }
        best
    }

    /// Apply the push rule for `i`'s cached pair.
    fn try_push(&mut self, i: usize) {
        let Some((j, val)) = self.matches[i] else {
            return;
        };
        if !(val > self.rho_c) {
            return;
        }
        if self.greedy {
            let partner_best = self.matches[j].map_or(f64::NEG_INFINITY, |(_, v)| v);
            if val < partner_best {
                // Dominated: park until the partner's best value drops.
                self.pending[j].push(i);
                return;
            }
        }
        self.queue.push(PairEntry { val, i, j });
        self.stats.pushes += 1;
    }

    /// Re-test pairs parked on `j` after `j`'s cached best value changed.
    fn recheck_pending(&mut self, j: usize) {
        if !self.greedy {
            return;
        }
        let parked = std::mem::take(&mut self.pending[j]);
        let partner_best = self.matches[j].map_or(f64::NEG_INFINITY, |(_, v)| v);
        for u in parked {
            // Stale entries: the parked set died or has been rematched.
            if !self.alive(u) {
                continue;
            }
            match self.matches[u] {
                Some((m, val)) if m == j => {
                    if val >= partner_best {
                        self.queue.push(PairEntry { val, i: u, j });
                        self.stats.pushes += 1;
                    } else {
                        self.pending[j].push(u);
                    }
                }
                _ => {}
            }
        }
    }
}

/// Partition comments by best-first centroid agglomeration.
pub fn cluster_topic(comments: &[Comment], vectors: &[SentenceVector], params: &Params) -> Partition {
    cluster_topic_detailed(comments, vectors, params, ClusterTopicOptions::default()).partition
}

pub fn cluster_topic_detailed(
    comments: &[Comment],
    vectors: &[SentenceVector],
    params: &Params,
    options: ClusterTopicOptions,
) -> TopicClustering {
    assert_eq!(comments.len(), vectors.len());
    let n = comments.len();
    let mut state = AgglomerationState {
        sets: comments
            .iter()
            .zip(vectors)
            .map(|(c, v)| Some(TopicSet::singleton(c.id, c.t, v)))
            .collect(),
        matches: vec![None; n],
        pending: vec![Vec::new(); n],
        queue: BinaryHeap::new(),
        gamma_t: params.gamma_t,
        rho_c: params.rho_c,
        greedy: options.greedy_rejection,
        stats: TopicStats::default(),
    };
    let mut trace = Vec::new();

    // Initial matching: compute every cache first, then push, so the rule
    // never reads a partner value that has not been computed yet.
    for i in 0..n {
        state.matches[i] = state.best_match(i);
    }
    for i in 0..n {
        state.try_push(i);
    }

    while let Some(PairEntry { val, i, j }) = state.queue.pop() {
        if !state.alive(i) || !state.alive(j) {
            continue;
        }
        debug_assert!(val > params.rho_c);

        let merged = merge_sets(state.set(i), state.set(j));
        state.sets[i] = None;
        state.sets[j] = None;
        let z = state.sets.len();
        state.sets.push(Some(merged));
        state.matches.push(None);
        state.pending.push(Vec::new());
        state.stats.merges += 1;
        if options.record_trace {
            trace.push(MergeStep {
                first: i,
                second: j,
                affinity: val,
                merged: z,
            });
        }

        // Refresh every cache invalidated by this merge before applying any
        // push rule: sets whose partner died, the new set, and survivors for
        // which the new set beats their cached best.
        let mut refreshed = vec![false; z];
        for u in 0..z {
            if !state.alive(u) {
                continue;
            }
            if matches!(state.matches[u], Some((m, _)) if m == i || m == j) {
                state.matches[u] = state.best_match(u);
                refreshed[u] = true;
            }
        }
        state.matches[z] = state.best_match(z);
        for u in 0..z {
            if !state.alive(u) || refreshed[u] {
                continue;
            }
            let val_uz = affinity(state.set(u), state.set(z), params.gamma_t);
            if state.matches[u].map_or(true, |(_, v)| val_uz > v) {
                state.matches[u] = Some((z, val_uz));
                refreshed[u] = true;
            }
        }

        for u in 0..z {
            if refreshed[u] {
                state.try_push(u);
                state.recheck_pending(u);
            }
        }
        state.try_push(z);
        state.recheck_pending(z);
    }

    let mut labels = vec![usize::MAX; n];
    for set in state.sets.iter().flatten() {
        let topic = set.members.iter().min().copied().expect("non-empty set");
        for &m in &set.members {
            labels[m] = topic;
        }
    }
    debug_assert!(labels.iter().all(|&l| l != usize::MAX));

    TopicClustering {
        partition: Partition::from_labels(&labels),
        trace,
        stats: state.stats,
    }
}

//! Topic partitioning of the semantic association graph.
//!
//! Two interchangeable clusterers produce a [`Partition`]: edge-driven
//! union-find merging for sparse comment streams ([`dialogue`]) and
//! best-first centroid agglomeration for dense ones ([`topic`]).

pub mod dialogue;
pub mod topic;

use serde::{Deserialize, Serialize};

pub use dialogue::{cluster_dialogue, union_density};
pub use topic::{affinity, cluster_topic, merge_sets, TopicSet};

/// Assignment of every comment to exactly one topic.
///
/// Topic ids are contiguous and ordered by each topic's smallest comment id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub topics: Vec<Vec<usize>>,
}

impl Partition {
    /// Normalize an arbitrary label vector into contiguous topic ids in
    /// first-appearance order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut assignment = Vec::with_capacity(labels.len());
        let mut topics: Vec<Vec<usize>> = Vec::new();
        for (id, &label) in labels.iter().enumerate() {
            let topic = *remap.entry(label).or_insert_with(|| {
                topics.push(Vec::new());
                topics.len() - 1
            });
            assignment.push(topic);
            topics[topic].push(id);
        }
        Partition { assignment, topics }
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }

    pub fn topic_of(&self, comment: usize) -> usize {
        self.assignment[comment]
    }

    pub fn topic_sizes(&self) -> Vec<usize> {
        self.topics.iter().map(Vec::len).collect()
    }

    /// Member lists as a canonical set-of-sets (members sorted, topics sorted
    /// by first member) for order-insensitive comparison.
    pub fn canonical_sets(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = self
            .topics
            .iter()
            .map(|members| {
                let mut m = members.clone();
                m.sort_unstable();
                m
            })
            .collect();
        sets.sort();
        sets
    }

    /// True if both partitions group comments identically, ignoring topic id
    /// numbering.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.canonical_sets() == other.canonical_sets()
    }
}

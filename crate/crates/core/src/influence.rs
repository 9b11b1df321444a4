//! Comment weighting and tag ranking.
//!
//! A comment's weight is its topic popularity (topic size over the geometric
//! mean of all topic sizes) times its influence value. Influence comes from a
//! two-phase fixed-point iteration over the intra-topic edges: an odd phase
//! amplifies each comment by its out-neighbors (walking late to early so
//! later values are already updated), an even phase normalizes it by its
//! in-neighbors (walking early to late), which pins every value into (0, 1].
//! Words are then ranked by SW-IDF: the summed weight of the comments
//! containing the word, times a smoothed inverse document frequency.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::corpus::Comment;
use crate::sag::Sag;

/// Per-comment topic popularity `|S_i| / geomean(|S_1|..|S_K|)`, computed in
/// log space.
pub fn popularity(partition: &Partition) -> Vec<f64> {
    assert!(partition.num_topics() >= 1, "partition has no topics");
    let log_gm = partition
        .topics
        .iter()
        .map(|t| (t.len() as f64).ln())
        .sum::<f64>()
        / partition.num_topics() as f64;
    let gm = log_gm.exp();
    partition
        .assignment
        .iter()
        .map(|&topic| partition.topics[topic].len() as f64 / gm)
        .collect()
}

/// Intra-topic restriction of the graph's edge weights.
#[derive(Debug, Clone)]
pub struct InfluenceMatrix {
    n: usize,
    out: Vec<Vec<(usize, f64)>>,
    incoming: Vec<Vec<(usize, f64)>>,
    nnz: usize,
}

impl InfluenceMatrix {
    /// Keep exactly the edges whose endpoints share a topic.
    pub fn from_sag(sag: &Sag, partition: &Partition) -> Self {
        assert_eq!(sag.n(), partition.n());
        let mut out = vec![Vec::new(); sag.n()];
        let mut incoming = vec![Vec::new(); sag.n()];
        let mut nnz = 0;
        for e in sag.edges() {
            if partition.topic_of(e.x) == partition.topic_of(e.y) {
                out[e.x].push((e.y, e.w));
                incoming[e.y].push((e.x, e.w));
                nnz += 1;
            }
        }
        InfluenceMatrix {
            n: sag.n(),
            out,
            incoming,
            nnz,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn out_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.out[i]
    }

    pub fn in_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.incoming[i]
    }
}

/// Stepwise influence iteration; one turn is an odd (amplify) phase followed
/// by an even (normalize) phase.
#[derive(Debug)]
pub struct InfluenceIteration<'a> {
    matrix: &'a InfluenceMatrix,
    values: Vec<f64>,
    turns_done: usize,
    last_mean_change: f64,
}

impl<'a> InfluenceIteration<'a> {
    pub fn new(matrix: &'a InfluenceMatrix) -> Self {
        InfluenceIteration {
            matrix,
            values: vec![1.0; matrix.n()],
            turns_done: 0,
            last_mean_change: f64::INFINITY,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn turns_done(&self) -> usize {
        self.turns_done
    }

    /// Mean relative change produced by the last turn.
    pub fn last_mean_change(&self) -> f64 {
        self.last_mean_change
    }

    pub fn step_turn(&mut self) {
        let n = self.matrix.n();
        let prev = self.values.clone();

        // Odd phase: late to early, so every out-neighbor is already updated.
        for i in (0..n).rev() {
            let gain: f64 = self
                .matrix
                .out_edges(i)
                .iter()
                .map(|&(j, w)| w * self.values[j])
                .sum();
            self.values[i] += gain;
        }
        // Even phase: early to late, in-neighbors already normalized.
        for i in 0..n {
            let drag: f64 = self
                .matrix
                .in_edges(i)
                .iter()
                .map(|&(j, w)| w * self.values[j])
                .sum();
            self.values[i] = self.values[i] / (self.values[i] + drag);
        }

        self.turns_done += 1;
        if n > 0 {
            self.last_mean_change = self
                .values
                .iter()
                .zip(&prev)
                .map(|(new, old)| (new - old).abs() / old)
                .sum::<f64>()
                / n as f64;
        } else {
            self.last_mean_change = 0.0;
        }
    }
}

#[derive(Debug, Clone)]
pub struct InfluenceOutcome {
    pub values: Vec<f64>,
    pub turns_run: usize,
    pub converged: bool,
}

/// Run up to `turns` turns, stopping once the mean relative change after an
/// even phase falls below `tol` (a tolerance of 0 disables early stopping).
pub fn iterate_influence(matrix: &InfluenceMatrix, turns: usize, tol: f64) -> InfluenceOutcome {
    let mut iter = InfluenceIteration::new(matrix);
    let mut converged = false;
    for _ in 0..turns {
        iter.step_turn();
        if iter.last_mean_change() < tol {
            converged = true;
            break;
        }
    }
    InfluenceOutcome {
        turns_run: iter.turns_done(),
        converged,
        values: iter.values,
    }
}

/// Elementwise popularity times influence.
pub fn comment_weights(popularity: &[f64], influence: &[f64]) -> Vec<f64> {
    assert_eq!(popularity.len(), influence.len());
    popularity
        .iter()
        .zip(influence)
        .map(|(p, i)| p * i)
        .collect()
}

/// Smoothed inverse document frequency over token documents:
/// `ln((1+N)/(1+df)) + 1`.
pub fn idf_from_documents<'a, I, T>(documents: I) -> HashMap<String, f64>
where
    I: IntoIterator<Item = &'a [T]>,
    T: AsRef<str> + 'a,
{
    let mut df: HashMap<String, usize> = HashMap::new();
    let mut n_docs = 0usize;
    for doc in documents {
        n_docs += 1;
        let unique: HashSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for word in unique {
            *df.entry(word.to_string()).or_insert(0) += 1;
        }
    }
    let n = n_docs as f64;
    df.into_iter()
        .map(|(word, count)| (word, ((1.0 + n) / (1.0 + count as f64)).ln() + 1.0))
        .collect()
}

/// Per-video idf, treating each comment as a document.
pub fn idf(comments: &[Comment]) -> HashMap<String, f64> {
    idf_from_documents(comments.iter().map(|c| c.tokens.as_slice()))
}

/// A word with its ranking score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTag {
    pub word: String,
    pub score: f64,
}

/// Ordered tag list, scores non-increasing, words unique.
pub type RankedTags = Vec<ScoredTag>;

fn top_k(mut scores: Vec<ScoredTag>, k: usize) -> RankedTags {
    scores.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.word.cmp(&b.word)));
    scores.truncate(k);
    scores
}

/// SW-IDF ranking: each word scores the summed weight of the comments that
/// contain it (counted once per comment) times its idf. Top `k` by score,
/// ties by word.
pub fn swidf_rank(
    comments: &[Comment],
    weights: &[f64],
    idf: &HashMap<String, f64>,
    k: usize,
    stopwords: &HashSet<String>,
) -> RankedTags {
    assert_eq!(comments.len(), weights.len());
    let mut weight_sums: HashMap<&str, f64> = HashMap::new();
    for (comment, &w) in comments.iter().zip(weights) {
        let unique: HashSet<&str> = comment.tokens.iter().map(String::as_str).collect();
        for word in unique {
            *weight_sums.entry(word).or_insert(0.0) += w;
        }
    }
    let scores = weight_sums
        .into_iter()
        .filter(|(word, _)| !stopwords.contains(*word))
        .map(|(word, sum)| ScoredTag {
            score: sum * idf.get(word).copied().unwrap_or(1.0),
            word: word.to_string(),
        })
        .collect();
    top_k(scores, k)
}

/// TF-IDF baseline: raw term frequency over the video's tokens times the
/// same idf.
pub fn tfidf_rank(
    comments: &[Comment],
    idf: &HashMap<String, f64>,
    k: usize,
    stopwords: &HashSet<String>,
) -> RankedTags {
    let mut tf: HashMap<&str, usize> = HashMap::new();
    for comment in comments {
        for word in &comment.tokens {
            *tf.entry(word).or_insert(0) += 1;
        }
    }
    let scores = tf
        .into_iter()
        .filter(|(word, _)| !stopwords.contains(*word))
        .map(|(word, count)| ScoredTag {
            score: count as f64 * idf.get(word).copied().unwrap_or(1.0),
            word: word.to_string(),
        })
        .collect();
    top_k(scores, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sag::Edge;

    fn comment(id: usize, t: f64, tokens: &[&str]) -> Comment {
        Comment {
            id,
            t,
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn chain_matrix(n: usize, edges: &[(usize, usize, f64)]) -> InfluenceMatrix {
        let sag = Sag::new(
            n,
            edges.iter().map(|&(x, y, w)| Edge { x, y, w }).collect(),
        );
        let partition = Partition::from_labels(&vec![0; n]);
        InfluenceMatrix::from_sag(&sag, &partition)
    }

    #[test]
    fn popularity_single_topic_is_one() {
        let p = Partition::from_labels(&[0, 0, 0, 0]);
        assert_eq!(popularity(&p), vec![1.0; 4]);
    }

    #[test]
    fn popularity_two_topics_frozen_values() {
        // sizes {4, 2}: geometric mean sqrt(8)
        let p = Partition::from_labels(&[0, 0, 0, 0, 1, 1]);
        let pop = popularity(&p);
        for i in 0..4 {
            assert!((pop[i] - 1.414213562373095).abs() < 1e-12);
        }
        for i in 4..6 {
            assert!((pop[i] - 0.7071067811865475).abs() < 1e-12);
        }
    }

    #[test]
    fn popularity_all_singletons_is_one() {
        let p = Partition::from_labels(&[0, 1, 2, 3, 4]);
        for v in popularity(&p) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn popularity_geometric_mean_normalizes() {
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 2, 2, 2, 2, 3]);
        let pop = popularity(&p);
        // geometric mean over topics of size/G is 1
        let log_sum: f64 = p
            .topics
            .iter()
            .map(|t| pop[t[0]].ln())
            .sum();
        assert!((log_sum / p.num_topics() as f64).abs() < 1e-12);
    }

    #[test]
    fn influence_matrix_keeps_only_intra_topic_edges() {
        let sag = Sag::new(
            3,
            vec![
                Edge { x: 0, y: 1, w: 0.8 },
                Edge { x: 1, y: 2, w: 0.5 },
            ],
        );
        let partition = Partition::from_labels(&[0, 0, 1]);
        let m = InfluenceMatrix::from_sag(&sag, &partition);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.out_edges(0), &[(1, 0.8)]);
        assert!(m.out_edges(1).is_empty());
    }

    #[test]
    fn isolated_comment_stays_at_one() {
        let m = chain_matrix(1, &[]);
        let mut it = InfluenceIteration::new(&m);
        for _ in 0..5 {
            it.step_turn();
            assert_eq!(it.values(), &[1.0]);
        }
    }

    #[test]
    fn two_node_chain_turn_by_turn() {
        let m = chain_matrix(2, &[(0, 1, 0.5)]);
        let mut it = InfluenceIteration::new(&m);
        it.step_turn();
        assert_eq!(it.values()[0], 1.0);
        assert!((it.values()[1] - 0.6666666666666666).abs() < 1e-15);
        it.step_turn();
        assert!((it.values()[1] - 0.5714285714285715).abs() < 1e-15);
        it.step_turn();
        assert!((it.values()[1] - 0.5333333333333333).abs() < 1e-15);
    }

    #[test]
    fn two_node_chain_closed_form() {
        for w10 in 1..=9 {
            let w = w10 as f64 / 10.0;
            let m = chain_matrix(2, &[(0, 1, w)]);
            let out = iterate_influence(&m, 500, 0.0);
            assert_eq!(out.values[0], 1.0);
            assert!(
                (out.values[1] - (1.0 - w)).abs() < 1e-6,
                "w={w}: {} vs {}",
                out.values[1],
                1.0 - w
            );
        }
    }

    #[test]
    fn values_bounded_after_even_phase() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..40);
            let mut edges = Vec::new();
            for x in 0..n {
                for y in x + 1..n {
                    if rng.gen_bool(0.3) {
                        edges.push((x, y, rng.gen_range(0.01..=1.0)));
                    }
                }
            }
            let m = chain_matrix(n, &edges);
            let mut it = InfluenceIteration::new(&m);
            for _ in 0..10 {
                it.step_turn();
                for &v in it.values() {
                    assert!(v > 0.0 && v <= 1.0, "out of bounds: {v}");
                }
            }
        }
    }

    #[test]
    fn early_stop_honors_tolerance() {
        let m = chain_matrix(2, &[(0, 1, 0.5)]);
        let out = iterate_influence(&m, 50, 0.05);
        assert!(out.converged);
        assert!(out.turns_run < 50);
        // tol 0 disables early stopping entirely
        let full = iterate_influence(&m, 50, 0.0);
        assert!(!full.converged);
        assert_eq!(full.turns_run, 50);
    }

    #[test]
    fn weights_are_products() {
        let w = comment_weights(&[1.0, 1.414213562373095], &[1.0, 0.5]);
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 0.7071067811865475).abs() < 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn idf_examples() {
        let comments = vec![
            comment(0, 0.0, &["goal", "messi"]),
            comment(1, 1.0, &["goal"]),
            comment(2, 2.0, &["goal"]),
        ];
        let table = idf(&comments);
        // in every document: ln(4/4)+1 = 1
        assert!((table["goal"] - 1.0).abs() < 1e-15);
        // in 1 of 3: ln(4/2)+1
        assert!((table["messi"] - 1.6931471805599454).abs() < 1e-15);
    }

    #[test]
    fn swidf_single_comment() {
        let comments = vec![comment(0, 0.0, &["goal"])];
        let table = idf(&comments);
        let tags = swidf_rank(&comments, &[1.0], &table, 5, &HashSet::new());
        assert_eq!(tags.len(), 1);
        assert_eq!(tags[0].word, "goal");
        assert!((tags[0].score - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swidf_counts_each_comment_once() {
        let comments = vec![
            comment(0, 0.0, &["messi", "messi", "goal"]),
            comment(1, 1.0, &["messi"]),
        ];
        let mut flat = HashMap::new();
        flat.insert("messi".to_string(), 1.0);
        flat.insert("goal".to_string(), 1.0);
        let tags = swidf_rank(&comments, &[0.8, 0.2], &flat, 5, &HashSet::new());
        let messi = tags.iter().find(|t| t.word == "messi").unwrap();
        // 0.8 + 0.2, not 0.8*2 + 0.2
        assert!((messi.score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tfidf_prefers_frequent_terms() {
        let comments = vec![comment(0, 0.0, &["a", "a", "b"])];
        let table = idf(&comments);
        let tags = tfidf_rank(&comments, &table, 5, &HashSet::new());
        assert_eq!(tags[0].word, "a");
        assert!(tags[0].score > tags[1].score);
    }

    #[test]
    fn tfidf_hand_computed_three_comments() {
        let comments = vec![
            comment(0, 0.0, &["x", "y"]),
            comment(1, 1.0, &["x"]),
            comment(2, 2.0, &["z"]),
        ];
        let table = idf(&comments);
        let tags = tfidf_rank(&comments, &table, 5, &HashSet::new());
        // tf(x)=2, idf(x)=ln(4/3)+1; tf(y)=tf(z)=1, idf=ln(4/2)+1
        let expect_x = 2.0 * ((4.0f64 / 3.0).ln() + 1.0);
        let expect_y = (4.0f64 / 2.0).ln() + 1.0;
        assert_eq!(tags[0].word, "x");
        assert!((tags[0].score - expect_x).abs() < 1e-12);
        assert_eq!(tags[1].word, "y"); // y before z lexicographically
        assert!((tags[1].score - expect_y).abs() < 1e-12);
    }

    #[test]
    fn rank_ties_break_lexicographically_and_k_truncates() {
        let comments = vec![comment(0, 0.0, &["b", "a", "c"])];
        let table: HashMap<String, f64> =
            [("a", 1.0), ("b", 1.0), ("c", 1.0)]
                .into_iter()
                .map(|(w, v)| (w.to_string(), v))
                .collect();
        let tags = swidf_rank(&comments, &[1.0], &table, 2, &HashSet::new());
        assert_eq!(tags.len(), 2);
        assert_eq!(tags[0].word, "a");
        assert_eq!(tags[1].word, "b");
        // k larger than the vocabulary returns everything
        let all = swidf_rank(&comments, &[1.0], &table, 99, &HashSet::new());
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn stopwords_excluded_from_ranking() {
        let comments = vec![comment(0, 0.0, &["the", "goal"])];
        let table = idf(&comments);
        let stop: HashSet<String> = ["the".to_string()].into_iter().collect();
        let tags = swidf_rank(&comments, &[1.0], &table, 5, &stop);
        assert_eq!(tags.len(), 1);
        assert_eq!(tags[0].word, "goal");
    }

    #[test]
    fn swidf_scale_consistent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let vocab = ["a", "b", "c", "d", "e"];
        let comments: Vec<Comment> = (0..10)
            .map(|i| {
                let k = rng.gen_range(1..4);
                let tokens: Vec<&str> = (0..k)
                    .map(|_| vocab[rng.gen_range(0..vocab.len())])
                    .collect();
                comment(i, i as f64, &tokens)
            })
            .collect();
        let weights: Vec<f64> = (0..10).map(|_| rng.gen_range(0.01..2.0)).collect();
        let table = idf(&comments);
        let base = swidf_rank(&comments, &weights, &table, 10, &HashSet::new());
        let c = 3.7;
        let scaled_w: Vec<f64> = weights.iter().map(|w| w * c).collect();
        let scaled = swidf_rank(&comments, &scaled_w, &table, 10, &HashSet::new());
        let base_words: Vec<&str> = base.iter().map(|t| t.word.as_str()).collect();
        let scaled_words: Vec<&str> = scaled.iter().map(|t| t.word.as_str()).collect();
        assert_eq!(base_words, scaled_words);
        for (b, s) in base.iter().zip(&scaled) {
            assert!((s.score - b.score * c).abs() <= 1e-9 * s.score.abs());
        }
    }
}

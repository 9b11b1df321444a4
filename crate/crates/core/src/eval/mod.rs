//! Ranking metrics, clustering-quality scores, and the synthetic corpus
//! generator used as a test oracle.

pub mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::Partition;
use crate::corpus::Comment;
use crate::embedding::{cosine, SentenceVector};
use crate::sag::decay;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold tag list is empty")]
    EmptyGold,
    #[error("inter-cluster distance needs at least two topics, got {0}")]
    TooFewTopics(usize),
}

/// Gold tags for one video, ordered by annotator vote count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldTags {
    pub video_id: String,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of the top-`k` ranked words against the gold set.
pub fn precision_recall_f1<R: AsRef<str>, G: AsRef<str>>(
    ranked: &[R],
    gold: &[G],
    k: usize,
) -> Result<Prf, EvalError> {
    assert!(k >= 1, "k must be at least 1");
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let gold_set: HashSet<&str> = gold.iter().map(AsRef::as_ref).collect();
    let hits = ranked
        .iter()
        .take(k)
        .filter(|w| gold_set.contains(w.as_ref()))
        .count() as f64;
    let precision = hits / k as f64;
    let recall = hits / gold.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Prf {
        precision,
        recall,
        f1,
    })
}

/// Average precision with denominator `|gold|`; gold items never retrieved
/// contribute zero.
pub fn average_precision<R: AsRef<str>, G: AsRef<str>>(
    ranked: &[R],
    gold: &[G],
) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let gold_set: HashSet<&str> = gold.iter().map(AsRef::as_ref).collect();
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (idx, word) in ranked.iter().enumerate() {
        if gold_set.contains(word.as_ref()) {
            hits += 1;
            sum += hits as f64 / (idx + 1) as f64;
        }
    }
    Ok(sum / gold.len() as f64)
}

/// Symmetric comment-pair affinity used by the clustering-quality metrics:
/// the edge-weight formula without pruning and with `|dt|`.
pub fn comment_affinity(
    a: &SentenceVector,
    b: &SentenceVector,
    ta: f64,
    tb: f64,
    gamma_t: f64,
) -> f64 {
    cosine(&a.values, &b.values) * decay((tb - ta).abs(), gamma_t)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClusterQuality {
    pub intra: f64,
    pub inter: f64,
    pub h: f64,
}

/// Average intra-cluster affinity (over topics with at least two members),
/// average inter-cluster affinity (over ordered topic pairs), and their
/// ratio H.
pub fn intra_inter_h(
    partition: &Partition,
    comments: &[Comment],
    vectors: &[SentenceVector],
    gamma_t: f64,
) -> Result<ClusterQuality, EvalError> {
    let k = partition.num_topics();
    if k < 2 {
        return Err(EvalError::TooFewTopics(k));
    }
    let aff = |i: usize, j: usize| {
        comment_affinity(&vectors[i], &vectors[j], comments[i].t, comments[j].t, gamma_t)
    };

    let mut intra_sum = 0.0;
    let mut intra_topics = 0usize;
    for members in &partition.topics {
        let s = members.len();
        if s < 2 {
            continue;
        }
        let mut topic_sum = 0.0;
        for a in 0..s {
            for b in a + 1..s {
                topic_sum += 2.0 * aff(members[a], members[b]);
            }
        }
        intra_sum += topic_sum / (s * (s - 1)) as f64;
        intra_topics += 1;
    }
    let intra = if intra_topics > 0 {
        intra_sum / intra_topics as f64
    } else {
        0.0
    };

    let mut inter_sum = 0.0;
    for (ka, ta) in partition.topics.iter().enumerate() {
        for (kb, tb) in partition.topics.iter().enumerate() {
            if ka == kb {
                continue;
            }
            let mut cross = 0.0;
            for &a in ta {
                for &b in tb {
                    cross += aff(a, b);
                }
            }
            inter_sum += cross / (ta.len() * tb.len()) as f64;
        }
    }
    let inter = inter_sum / (k * (k - 1)) as f64;

    let h = if inter == 0.0 {
        if intra == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        intra / inter
    };
    Ok(ClusterQuality {
        intra,
        inter,
        h,
    })
}

/// Comment-density buckets in comments per minute.
pub const DENSITY_BUCKETS: [(f64, f64); 5] = [
    (0.0, 30.0),
    (30.0, 60.0),
    (60.0, 90.0),
    (90.0, 120.0),
    (120.0, f64::INFINITY),
];

pub fn density_bucket(density: f64) -> usize {
    DENSITY_BUCKETS
        .iter()
        .position(|&(lo, hi)| density >= lo && density < hi)
        .unwrap_or(DENSITY_BUCKETS.len() - 1)
}

pub fn bucket_label(bucket: usize) -> String {
    let (lo, hi) = DENSITY_BUCKETS[bucket];
    if hi.is_infinite() {
        format!(">={lo}")
    } else {
        format!("{lo}-{hi}")
    }
}

/// One video's H scores under both clusterers.
#[derive(Debug, Clone, Copy)]
pub struct HScores {
    pub density: f64,
    pub h_dialogue: f64,
    pub h_topic: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct HitCounts {
    pub d_hit: usize,
    pub t_hit: usize,
    pub videos: usize,
}

/// Per-bucket hit counts: the clusterer with the larger H wins a video;
/// exact ties count for neither.
pub fn h_hit(scores: &[HScores]) -> [HitCounts; 5] {
    let mut table = [HitCounts::default(); 5];
    for s in scores {
        let bucket = &mut table[density_bucket(s.density)];
        bucket.videos += 1;
        if s.h_dialogue > s.h_topic {
            bucket.d_hit += 1;
        } else if s.h_topic > s.h_dialogue {
            bucket.t_hit += 1;
        }
    }
    table
}

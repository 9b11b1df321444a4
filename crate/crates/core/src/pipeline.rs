//! Per-video end-to-end pipeline: embed, build the graph, cluster, weight,
//! rank.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cluster::topic::{cluster_topic_detailed, ClusterTopicOptions, MergeStep};
use crate::cluster::{cluster_dialogue, Partition};
use crate::corpus::Comment;
use crate::embedding::{sentence_vector, EmbeddingTable, SentenceVector};
use crate::eval::{intra_inter_h, EvalError, HScores};
use crate::influence::{
    comment_weights, idf, idf_from_documents, iterate_influence, popularity, swidf_rank,
    tfidf_rank, InfluenceMatrix, RankedTags,
};
use crate::sag::{build_sag, Params, Sag, SagDump, GAMMA_DIALOGUE, GAMMA_TOPIC_CENTER};

/// Which clusterer to run. `Auto` picks by comment density: dialogue below
/// the threshold, topic-center at or above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clusterer {
    Dialogue,
    TopicCenter,
    Auto,
}

impl std::str::FromStr for Clusterer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dialogue" => Ok(Clusterer::Dialogue),
            "topic-center" => Ok(Clusterer::TopicCenter),
            "auto" => Ok(Clusterer::Auto),
            other => Err(format!(
                "unknown clusterer {other:?}, expected dialogue, topic-center, or auto"
            )),
        }
    }
}

/// The clusterer actually run on a video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolvedClusterer {
    Dialogue,
    TopicCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdfMode {
    /// Documents are the comments of the video under analysis.
    PerVideo,
    /// Documents are all comments across all loaded videos.
    Corpus,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub clusterer: Clusterer,
    /// Density split for `Auto`, in comments per minute.
    pub density_threshold: f64,
    /// Decay rate; when absent the per-clusterer operating point is used
    /// (0.12 dialogue, 0.13 topic-center).
    pub gamma_t: Option<f64>,
    pub rho_d: f64,
    pub rho_c: f64,
    pub turns: usize,
    /// Early-stop tolerance on the influence iteration's mean relative
    /// change.
    pub tol: f64,
    pub edge_cutoff_eps: f64,
    /// Tags to emit per video.
    pub k: usize,
    pub idf_mode: IdfMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let params = Params::default();
        PipelineConfig {
            clusterer: Clusterer::Auto,
            density_threshold: 60.0,
            gamma_t: None,
            rho_d: params.rho_d,
            rho_c: params.rho_c,
            turns: params.turns,
            tol: 0.05,
            edge_cutoff_eps: params.edge_cutoff_eps,
            k: 10,
            idf_mode: IdfMode::PerVideo,
        }
    }
}

impl PipelineConfig {
    /// Resolve the clusterer for a video of the given density.
    pub fn resolve_clusterer(&self, density: f64) -> ResolvedClusterer {
        match self.clusterer {
            Clusterer::Dialogue => ResolvedClusterer::Dialogue,
            Clusterer::TopicCenter => ResolvedClusterer::TopicCenter,
            Clusterer::Auto => {
                if density < self.density_threshold {
                    ResolvedClusterer::Dialogue
                } else {
                    ResolvedClusterer::TopicCenter
                }
            }
        }
    }

    pub fn params_for(&self, clusterer: ResolvedClusterer) -> Params {
        let gamma_t = self.gamma_t.unwrap_or(match clusterer {
            ResolvedClusterer::Dialogue => GAMMA_DIALOGUE,
            ResolvedClusterer::TopicCenter => GAMMA_TOPIC_CENTER,
        });
        Params {
            gamma_t,
            rho_d: self.rho_d,
            rho_c: self.rho_c,
            turns: self.turns,
            edge_cutoff_eps: self.edge_cutoff_eps,
        }
    }
}

/// Comments per minute, with the video length taken as the last timestamp.
/// A video whose comments all sit at t = 0 counts as maximally dense.
pub fn video_density(comments: &[Comment]) -> f64 {
    if comments.is_empty() {
        return 0.0;
    }
    let max_t = comments.iter().map(|c| c.t).fold(0.0, f64::max);
    if max_t <= 0.0 {
        return f64::INFINITY;
    }
    comments.len() as f64 / (max_t / 60.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct VideoAnalysis {
    pub video_id: String,
    pub n_comments: usize,
    pub density: f64,
    pub clusterer: ResolvedClusterer,
    pub gamma_t: f64,
    pub num_topics: usize,
    pub influence_turns: usize,
    pub influence_converged: bool,
    pub tags: RankedTags,
    #[serde(skip)]
    pub partition: Partition,
    #[serde(skip)]
    pub weights: Vec<f64>,
}

/// Run the full tag-extraction pipeline on one video.
///
/// `corpus_idf` supplies the corpus-wide idf table when
/// [`IdfMode::Corpus`] is selected; per-video idf is computed here.
pub fn analyze_video(
    video_id: &str,
    comments: &[Comment],
    table: &EmbeddingTable,
    config: &PipelineConfig,
    corpus_idf: Option<&HashMap<String, f64>>,
) -> VideoAnalysis {
    let vectors = embed_all(comments, table);
    let density = video_density(comments);
    let clusterer = config.resolve_clusterer(density);
    let params = config.params_for(clusterer);

    let sag = build_sag(comments, &vectors, &params);
    let partition = run_clusterer(clusterer, &sag, comments, &vectors, &params);

    let (weights, influence) = weigh_comments(&sag, &partition, &params, config.tol);

    let owned_idf;
    let idf_table = match (config.idf_mode, corpus_idf) {
        (IdfMode::Corpus, Some(shared)) => shared,
        _ => {
            owned_idf = idf(comments);
            &owned_idf
        }
    };
    let tags = swidf_rank(comments, &weights, idf_table, config.k, &HashSet::new());

    VideoAnalysis {
        video_id: video_id.to_string(),
        n_comments: comments.len(),
        density,
        clusterer,
        gamma_t: params.gamma_t,
        num_topics: partition.num_topics(),
        influence_turns: influence.turns_run,
        influence_converged: influence.converged,
        tags,
        partition,
        weights,
    }
}

pub fn embed_all(comments: &[Comment], table: &EmbeddingTable) -> Vec<SentenceVector> {
    comments
        .iter()
        .map(|c| sentence_vector(&c.tokens, table))
        .collect()
}

fn run_clusterer(
    clusterer: ResolvedClusterer,
    sag: &Sag,
    comments: &[Comment],
    vectors: &[SentenceVector],
    params: &Params,
) -> Partition {
    match clusterer {
        ResolvedClusterer::Dialogue => cluster_dialogue(sag, params.rho_d),
        ResolvedClusterer::TopicCenter => {
            crate::cluster::cluster_topic(comments, vectors, params)
        }
    }
}

fn weigh_comments(
    sag: &Sag,
    partition: &Partition,
    params: &Params,
    tol: f64,
) -> (Vec<f64>, crate::influence::InfluenceOutcome) {
    if partition.n() == 0 {
        return (
            Vec::new(),
            crate::influence::InfluenceOutcome {
                values: Vec::new(),
                turns_run: 0,
                converged: true,
            },
        );
    }
    let pop = popularity(partition);
    let matrix = InfluenceMatrix::from_sag(sag, partition);
    let influence = iterate_influence(&matrix, params.turns, tol);
    (comment_weights(&pop, &influence.values), influence)
}

/// Corpus-wide idf over all videos' comments.
pub fn corpus_idf<'a>(
    videos: impl IntoIterator<Item = &'a [Comment]>,
) -> HashMap<String, f64> {
    let docs: Vec<&[String]> = videos
        .into_iter()
        .flat_map(|comments| comments.iter().map(|c| c.tokens.as_slice()))
        .collect();
    idf_from_documents(docs)
}

/// TF-IDF baseline tags for one video with the same idf convention.
pub fn tfidf_tags(
    comments: &[Comment],
    config: &PipelineConfig,
    corpus_idf: Option<&HashMap<String, f64>>,
) -> RankedTags {
    let owned;
    let idf_table = match (config.idf_mode, corpus_idf) {
        (IdfMode::Corpus, Some(shared)) => shared,
        _ => {
            owned = idf(comments);
            &owned
        }
    };
    tfidf_rank(comments, idf_table, config.k, &HashSet::new())
}

/// Per-topic digest for tag output: time span and top words of one topic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub size: usize,
    /// Earliest member timestamp.
    pub st: f64,
    /// Mean member timestamp.
    pub ct: f64,
    pub top_words: Vec<String>,
}

/// Summarize each topic of an analyzed video: start/center time plus the
/// topic's top words by comment-weight-summed idf score.
pub fn topic_summaries(
    comments: &[Comment],
    analysis: &VideoAnalysis,
    words_per_topic: usize,
) -> Vec<TopicSummary> {
    let idf_table = idf(comments);
    analysis
        .partition
        .topics
        .iter()
        .enumerate()
        .map(|(topic_id, members)| {
            let ts: Vec<f64> = members.iter().map(|&m| comments[m].t).collect();
            let st = ts.iter().copied().fold(f64::INFINITY, f64::min);
            let ct = ts.iter().sum::<f64>() / ts.len() as f64;
            let topic_comments: Vec<Comment> =
                members.iter().map(|&m| comments[m].clone()).collect();
            let topic_weights: Vec<f64> =
                members.iter().map(|&m| analysis.weights[m]).collect();
            let top_words = swidf_rank(
                &topic_comments,
                &topic_weights,
                &idf_table,
                words_per_topic,
                &HashSet::new(),
            )
            .into_iter()
            .map(|t| t.word)
            .collect();
            TopicSummary {
                topic_id,
                size: members.len(),
                st,
                ct,
                top_words,
            }
        })
        .collect()
}

/// Clustering-only output for the `cluster` command.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    pub video_id: String,
    pub n_comments: usize,
    pub density: f64,
    pub clusterer: ResolvedClusterer,
    pub assignment: Vec<usize>,
    pub num_topics: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<SagDump>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<MergeStep>>,
}

pub fn cluster_video(
    video_id: &str,
    comments: &[Comment],
    table: &EmbeddingTable,
    config: &PipelineConfig,
    dump_graph: bool,
    record_trace: bool,
) -> ClusterReport {
    let vectors = embed_all(comments, table);
    let density = video_density(comments);
    let clusterer = config.resolve_clusterer(density);
    let params = config.params_for(clusterer);
    let sag = build_sag(comments, &vectors, &params);

    let (partition, trace) = match clusterer {
        ResolvedClusterer::Dialogue => (cluster_dialogue(&sag, params.rho_d), None),
        ResolvedClusterer::TopicCenter => {
            let detailed = cluster_topic_detailed(
                comments,
                &vectors,
                &params,
                ClusterTopicOptions {
                    greedy_rejection: true,
                    record_trace,
                },
            );
            let trace = record_trace.then_some(detailed.trace);
            (detailed.partition, trace)
        }
    };

    ClusterReport {
        video_id: video_id.to_string(),
        n_comments: comments.len(),
        density,
        clusterer,
        assignment: partition.assignment.clone(),
        num_topics: partition.num_topics(),
        graph: dump_graph.then(|| sag.to_dump()),
        trace,
    }
}

/// Run both clusterers on one video and score each with H.
pub fn compare_clusterers(
    comments: &[Comment],
    table: &EmbeddingTable,
    config: &PipelineConfig,
) -> Result<HScores, EvalError> {
    let vectors = embed_all(comments, table);
    let density = video_density(comments);

    let dialogue_params = {
        let mut c = config.clone();
        c.clusterer = Clusterer::Dialogue;
        c.params_for(ResolvedClusterer::Dialogue)
    };
    let topic_params = {
        let mut c = config.clone();
        c.clusterer = Clusterer::TopicCenter;
        c.params_for(ResolvedClusterer::TopicCenter)
    };

    let sag = build_sag(comments, &vectors, &dialogue_params);
    let dialogue = cluster_dialogue(&sag, dialogue_params.rho_d);
    let topic = crate::cluster::cluster_topic(comments, &vectors, &topic_params);

    let h_dialogue = intra_inter_h(&dialogue, comments, &vectors, dialogue_params.gamma_t)?;
    let h_topic = intra_inter_h(&topic, comments, &vectors, topic_params.gamma_t)?;
    Ok(HScores {
        density,
        h_dialogue: h_dialogue.h,
        h_topic: h_topic.h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::read_embeddings;

    fn tiny_table() -> EmbeddingTable {
        read_embeddings(
            "4 2\nmessi 1 0\ngoal 0.9 0.1\nbgm 0 1\nmusic 0.1 0.9\n".as_bytes(),
        )
        .unwrap()
    }

    fn comment(id: usize, t: f64, tokens: &[&str]) -> Comment {
        Comment {
            id,
            t,
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn density_conventions() {
        assert_eq!(video_density(&[]), 0.0);
        assert!(video_density(&[comment(0, 0.0, &[])]).is_infinite());
        // 4 comments over 2 minutes
        let comments: Vec<Comment> =
            (0..4).map(|i| comment(i, i as f64 * 40.0, &[])).collect();
        assert!((video_density(&comments) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn auto_mode_switches_on_threshold() {
        let config = PipelineConfig::default();
        assert_eq!(
            config.resolve_clusterer(20.0),
            ResolvedClusterer::Dialogue
        );
        assert_eq!(
            config.resolve_clusterer(60.0),
            ResolvedClusterer::TopicCenter
        );
        assert_eq!(
            config.resolve_clusterer(200.0),
            ResolvedClusterer::TopicCenter
        );
    }

    #[test]
    fn per_clusterer_gamma_defaults() {
        let config = PipelineConfig::default();
        assert_eq!(
            config.params_for(ResolvedClusterer::Dialogue).gamma_t,
            0.12
        );
        assert_eq!(
            config.params_for(ResolvedClusterer::TopicCenter).gamma_t,
            0.13
        );
        let pinned = PipelineConfig {
            gamma_t: Some(0.2),
            ..PipelineConfig::default()
        };
        assert_eq!(pinned.params_for(ResolvedClusterer::Dialogue).gamma_t, 0.2);
    }

    #[test]
    fn analyze_extracts_topic_words() {
        let table = tiny_table();
        let comments = vec![
            comment(0, 0.0, &["messi", "goal"]),
            comment(1, 2.0, &["messi"]),
            comment(2, 4.0, &["goal", "messi"]),
            comment(3, 300.0, &["bgm"]),
        ];
        let config = PipelineConfig {
            clusterer: Clusterer::Dialogue,
            k: 2,
            ..PipelineConfig::default()
        };
        let analysis = analyze_video("v1", &comments, &table, &config, None);
        assert_eq!(analysis.n_comments, 4);
        assert_eq!(analysis.tags.len(), 2);
        assert_eq!(analysis.tags[0].word, "messi");
        assert!(analysis.partition.num_topics() >= 2);
        assert_eq!(analysis.weights.len(), 4);
    }

    #[test]
    fn empty_video_yields_empty_tags() {
        let table = tiny_table();
        let config = PipelineConfig::default();
        let analysis = analyze_video("empty", &[], &table, &config, None);
        assert!(analysis.tags.is_empty());
        assert_eq!(analysis.n_comments, 0);
    }

    #[test]
    fn corpus_idf_covers_all_videos() {
        let v1 = vec![comment(0, 0.0, &["messi"])];
        let v2 = vec![comment(0, 0.0, &["bgm"])];
        let shared = corpus_idf([v1.as_slice(), v2.as_slice()]);
        assert!(shared.contains_key("messi"));
        assert!(shared.contains_key("bgm"));
        // two docs, each word in one: ln(3/2)+1
        let expect = (3.0f64 / 2.0).ln() + 1.0;
        assert!((shared["messi"] - expect).abs() < 1e-12);
    }

    #[test]
    fn cluster_report_carries_optional_extras() {
        let table = tiny_table();
        let comments = vec![
            comment(0, 0.0, &["messi"]),
            comment(1, 1.0, &["goal"]),
        ];
        let config = PipelineConfig {
            clusterer: Clusterer::TopicCenter,
            ..PipelineConfig::default()
        };
        let report = cluster_video("v", &comments, &table, &config, true, true);
        assert!(report.graph.is_some());
        assert!(report.trace.is_some());
        assert_eq!(report.assignment.len(), 2);

        let bare = cluster_video("v", &comments, &table, &config, false, false);
        assert!(bare.graph.is_none());
        assert!(bare.trace.is_none());
    }
}

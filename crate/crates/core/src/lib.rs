//! Video tag extraction from time-sync comment streams.
//!
//! The pipeline builds a semantic association graph over a video's comments
//! (cosine similarity of mean word vectors, decayed by time distance),
//! clusters it into topics with one of two algorithms chosen by comment
//! density, weighs each comment by topic popularity and an influence fixed
//! point, and ranks words by SW-IDF to produce video tags. The [`eval`]
//! module provides ranking and clustering-quality metrics plus a synthetic
//! corpus generator for testing.

pub mod cluster;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod influence;
pub mod pipeline;
pub mod sag;

pub use cluster::{cluster_dialogue, cluster_topic, Partition};
pub use corpus::{normalize_video, parse_comments, Comment, NormalizationConfig, RawComment};
pub use embedding::{cosine, load_embeddings, sentence_vector, EmbeddingTable, SentenceVector};
pub use influence::{RankedTags, ScoredTag};
pub use pipeline::{analyze_video, Clusterer, PipelineConfig, VideoAnalysis};
pub use sag::{build_sag, decay, Params, Sag};

//! Deterministic synthetic corpora with planted topics, used as ground truth
//! in the property and trend tests.
//!
//! Each planted topic owns a private vocabulary whose word vectors cluster
//! around a random unit direction, and a contiguous time window sized so the
//! whole video hits the requested comment density. Noise comments draw from a
//! disjoint vocabulary of mutually unrelated words at arbitrary times and are
//! planted as singletons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::cluster::Partition;
use crate::corpus::Comment;
use crate::embedding::EmbeddingTable;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub topics: usize,
    pub comments_per_topic: usize,
    pub vocab_per_topic: usize,
    /// Target comments per minute over the whole video.
    pub density: f64,
    /// Fraction of the final corpus that is noise, in `[0, 1)`.
    pub noise_fraction: f64,
    pub seed: u64,
    /// Embedding dimension.
    pub dim: usize,
    /// Prepended to every generated word, so corpora with several videos
    /// keep disjoint vocabularies.
    pub word_prefix: String,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            topics: 2,
            comments_per_topic: 10,
            vocab_per_topic: 5,
            density: 30.0,
            noise_fraction: 0.0,
            seed: 0,
            dim: 16,
            word_prefix: String::new(),
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: &str| Err(SynthError::Invalid(msg.into()));
        if self.topics == 0 {
            return fail("topics must be >= 1");
        }
        if self.comments_per_topic == 0 {
            return fail("comments_per_topic must be >= 1");
        }
        if self.vocab_per_topic == 0 {
            return fail("vocab_per_topic must be >= 1");
        }
        if !(self.density > 0.0) {
            return fail("density must be positive");
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return fail("noise_fraction must be in [0, 1)");
        }
        if self.dim == 0 {
            return fail("dim must be >= 1");
        }
        Ok(())
    }
}

/// One generated video with its planted ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    pub video_id: String,
    /// Normalized comments, sorted with contiguous ids.
    pub comments: Vec<Comment>,
    /// Planted truth: one topic per planted cluster, noise as singletons.
    pub planted: Partition,
    /// Index into `comments` of the noise entries.
    pub noise_ids: Vec<usize>,
    /// The planted tag word of each topic, in topic order.
    pub gold_tags: Vec<String>,
    pub duration_secs: f64,
    pub embeddings: EmbeddingTable,
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    } else {
        v[0] = 1.0;
    }
    v
}

fn jittered(rng: &mut ChaCha8Rng, direction: &[f64], sigma: f64) -> Vec<f64> {
    let mut v: Vec<f64> = direction
        .iter()
        .map(|d| d + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticVideo, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let planted_total = spec.topics * spec.comments_per_topic;
    let noise_count = if spec.noise_fraction > 0.0 {
        let f = spec.noise_fraction;
        (planted_total as f64 * f / (1.0 - f)).round() as usize
    } else {
        0
    };
    let total = planted_total + noise_count;
    let duration_secs = total as f64 / spec.density * 60.0;

    // Vocabulary vectors: one coherent direction per topic, unrelated unit
    // vectors for noise words.
    let mut pairs: Vec<(String, Vec<f64>)> = Vec::new();
    let mut topic_vocab: Vec<Vec<String>> = Vec::new();
    let prefix = &spec.word_prefix;
    for topic in 0..spec.topics {
        let direction = unit_gaussian(&mut rng, spec.dim);
        let words: Vec<String> = (0..spec.vocab_per_topic)
            .map(|w| format!("{prefix}t{topic}w{w}"))
            .collect();
        for word in &words {
            pairs.push((word.clone(), jittered(&mut rng, &direction, 0.15)));
        }
        topic_vocab.push(words);
    }
    let noise_vocab_size = noise_count.max(4);
    let noise_vocab: Vec<String> = (0..noise_vocab_size)
        .map(|w| format!("{prefix}nw{w}"))
        .collect();
    for word in &noise_vocab {
        pairs.push((word.clone(), unit_gaussian(&mut rng, spec.dim)));
    }
    let embeddings = EmbeddingTable::from_pairs(spec.dim, pairs);

    // Draw comments: topic k occupies the k-th slice of the timeline; its
    // first vocabulary word is planted in every comment as the tag word.
    let window = duration_secs / spec.topics as f64;
    let mut drafts: Vec<(f64, Vec<String>, usize)> = Vec::new();
    for topic in 0..spec.topics {
        let start = topic as f64 * window;
        for _ in 0..spec.comments_per_topic {
            let t = start + rng.gen_range(0.0..window);
            let mut tokens = vec![topic_vocab[topic][0].clone()];
            for _ in 0..rng.gen_range(2..=4) {
                let w = rng.gen_range(0..spec.vocab_per_topic);
                tokens.push(topic_vocab[topic][w].clone());
            }
            drafts.push((t, tokens, topic));
        }
    }
    for noise in 0..noise_count {
        let t = rng.gen_range(0.0..duration_secs);
        let mut tokens = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            tokens.push(noise_vocab[rng.gen_range(0..noise_vocab.len())].clone());
        }
        drafts.push((t, tokens, spec.topics + noise));
    }

    drafts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
    let comments: Vec<Comment> = drafts
        .iter()
        .enumerate()
        .map(|(id, (t, tokens, _))| Comment {
            id,
            t: *t,
            tokens: tokens.clone(),
        })
        .collect();
    let labels: Vec<usize> = drafts.iter().map(|(_, _, label)| *label).collect();
    let planted = Partition::from_labels(&labels);
    let noise_ids: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= spec.topics)
        .map(|(id, _)| id)
        .collect();

    let gold_tags: Vec<String> = (0..spec.topics)
        .map(|k| format!("{prefix}t{k}w0"))
        .collect();

    Ok(SyntheticVideo {
        video_id: format!("synthetic-{}", spec.seed),
        comments,
        planted,
        noise_ids,
        gold_tags,
        duration_secs,
        embeddings,
    })
}

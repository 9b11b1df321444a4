//! Comment stream parsing and token normalization.
//!
//! Input is JSON-lines, one comment per line, with fields `video_id`, `t`
//! (seconds) and either `text` or pre-split `tokens`. Normalization
//! lowercases, applies a slang map once per token, drops symbol-only tokens
//! and stopwords, then sorts by `(t, input order)` and assigns contiguous ids.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};

use indexmap::IndexMap;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("i/o error reading comments: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Record { line: usize, msg: String },
}

/// One comment as read from the input stream, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawComment {
    pub video_id: String,
    pub t: f64,
    pub content: RawContent,
}

/// Either free text or pre-split tokens. When a record carries both,
/// `tokens` wins.
#[derive(Debug, Clone, PartialEq)]
pub enum RawContent {
    Text(String),
    Tokens(Vec<String>),
}

/// A normalized comment. Ids are contiguous `0..N-1` in `(t, input order)`
/// order within a video.
#[derive(Debug, Clone, PartialEq)]
pub struct Comment {
    pub id: usize,
    pub t: f64,
    pub tokens: Vec<String>,
}

/// Token normalization rules.
///
/// The slang map is applied once per token (replacements are not looked up
/// again) and before stopword filtering. A replacement value may contain
/// several words. With `symbol_filter` on, tokens without any alphanumeric
/// character are dropped.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct NormalizationConfig {
    #[serde(default)]
    pub slang_map: HashMap<String, SlangReplacement>,
    #[serde(default, deserialize_with = "lowered_set")]
    pub stopwords: HashSet<String>,
    #[serde(default = "default_true")]
    pub symbol_filter: bool,
}

fn default_true() -> bool {
    true
}

fn lowered_set<'de, D: serde::Deserializer<'de>>(d: D) -> Result<HashSet<String>, D::Error> {
    let raw: Vec<String> = Vec::deserialize(d)?;
    Ok(raw.into_iter().map(|w| w.to_lowercase()).collect())
}

/// A slang replacement: one word or several.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SlangReplacement {
    One(String),
    Many(Vec<String>),
}

impl SlangReplacement {
    fn words(&self) -> Vec<String> {
        match self {
            SlangReplacement::One(s) => s.split_whitespace().map(str::to_string).collect(),
            SlangReplacement::Many(v) => v.clone(),
        }
    }
}

impl NormalizationConfig {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// Config that only lowercases and drops symbol tokens.
    pub fn plain() -> Self {
        NormalizationConfig {
            slang_map: HashMap::new(),
            stopwords: HashSet::new(),
            symbol_filter: true,
        }
    }
}

#[derive(Deserialize)]
struct RecordDto {
    video_id: String,
    t: f64,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    tokens: Option<Vec<String>>,
}

/// Parse a JSON-lines comment stream, grouping records by video id.
///
/// Video order follows first appearance; within a video the input order is
/// preserved (sorting happens in [`normalize_video`]). Malformed records and
/// negative timestamps are rejected with their line number.
pub fn parse_comments<R: Read>(reader: R) -> Result<IndexMap<String, Vec<RawComment>>, ParseError> {
    let reader = BufReader::new(reader);
    let mut videos: IndexMap<String, Vec<RawComment>> = IndexMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let dto: RecordDto = serde_json::from_str(&line).map_err(|e| ParseError::Record {
            line: line_no,
            msg: format!("malformed record: {e}"),
        })?;
        let raw = validate_record(dto, line_no)?;
        videos.entry(raw.video_id.clone()).or_default().push(raw);
    }
    Ok(videos)
}

fn validate_record(dto: RecordDto, line: usize) -> Result<RawComment, ParseError> {
    let reject = |msg: String| ParseError::Record { line, msg };
    if dto.video_id.is_empty() {
        return Err(reject("empty video_id".into()));
    }
    if !dto.t.is_finite() {
        return Err(reject("non-finite timestamp".into()));
    }
    if dto.t < 0.0 {
        return Err(reject("negative timestamp".into()));
    }
    let content = match (dto.tokens, dto.text) {
        (Some(tokens), _) => RawContent::Tokens(tokens),
        (None, Some(text)) => {
            if text.trim().is_empty() {
                return Err(reject("empty text".into()));
            }
            RawContent::Text(text)
        }
        (None, None) => return Err(reject("record has neither text nor tokens".into())),
    };
    Ok(RawComment {
        video_id: dto.video_id,
        t: dto.t,
        content,
    })
}

/// Normalize one video's comments and assign ordinal ids.
///
/// Comments whose tokens all filter away are kept with an empty token list;
/// they become isolated graph nodes downstream.
pub fn normalize_video(raws: &[RawComment], cfg: &NormalizationConfig) -> Vec<Comment> {
    let mut order: Vec<usize> = (0..raws.len()).collect();
    order.sort_by(|&a, &b| raws[a].t.partial_cmp(&raws[b].t).expect("finite timestamps"));

    order
        .into_iter()
        .enumerate()
        .map(|(id, src)| Comment {
            id,
            t: raws[src].t,
            tokens: normalize_tokens(&raws[src].content, cfg),
        })
        .collect()
}

fn normalize_tokens(content: &RawContent, cfg: &NormalizationConfig) -> Vec<String> {
    let raw_tokens: Vec<String> = match content {
        RawContent::Text(text) => text.split_whitespace().map(str::to_string).collect(),
        RawContent::Tokens(tokens) => tokens.clone(),
    };

    let mut out = Vec::with_capacity(raw_tokens.len());
    for token in raw_tokens {
        let token = token.to_lowercase();
        let replaced = match cfg.slang_map.get(&token) {
            Some(rep) => rep.words(),
            None => vec![token],
        };
        for word in replaced {
            if cfg.symbol_filter && !word.chars().any(char::is_alphanumeric) {
                continue;
            }
            if cfg.stopwords.contains(&word) {
                continue;
            }
            out.push(word);
        }
    }
    out
}

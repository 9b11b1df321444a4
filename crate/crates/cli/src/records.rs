//! File formats shared between commands: JSON-lines records and helpers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sagtag_core::influence::ScoredTag;
use sagtag_core::pipeline::{ResolvedClusterer, TopicSummary};

/// One `extract` output line.
#[derive(Debug, Serialize)]
pub struct TagRecord {
    pub video_id: String,
    pub method: String,
    pub n_comments: usize,
    pub density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusterer: Option<ResolvedClusterer>,
    pub tags: Vec<ScoredTag>,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topics: Option<Vec<TopicSummary>>,
}

/// The subset of a tag record that `eval` needs.
#[derive(Debug, Deserialize)]
pub struct TagRecordIn {
    pub video_id: String,
    pub tags: Vec<ScoredTag>,
    #[serde(default)]
    pub density: Option<f64>,
}

/// One gold-tags line: words ordered by vote count.
#[derive(Debug, Serialize, Deserialize)]
pub struct GoldRecord {
    pub video_id: String,
    pub tags: Vec<String>,
}

/// Planted ground-truth partition emitted by `gen`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PlantedRecord {
    pub video_id: String,
    pub assignment: Vec<usize>,
}

/// One comment line emitted by `gen` (tokens form).
#[derive(Debug, Serialize)]
pub struct CommentRecord<'a> {
    pub video_id: &'a str,
    pub t: f64,
    pub tokens: &'a [String],
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}: read error", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .with_context(|| format!("{}: line {}", path.display(), idx + 1))?;
        records.push(record);
    }
    Ok(records)
}

/// Line-oriented writer targeting a file or stdout.
pub enum OutputSink {
    File(BufWriter<File>),
    Stdout(std::io::Stdout),
}

impl OutputSink {
    pub fn create(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            Some(p) => {
                let file = File::create(p)
                    .with_context(|| format!("cannot create {}", p.display()))?;
                Ok(OutputSink::File(BufWriter::new(file)))
            }
            None => Ok(OutputSink::Stdout(std::io::stdout())),
        }
    }

    pub fn write_json_line<T: Serialize>(&mut self, record: &T) -> Result<()> {
        let line = serde_json::to_string(record)?;
        self.writeln(&line)
    }

    pub fn writeln(&mut self, line: &str) -> Result<()> {
        match self {
            OutputSink::File(w) => {
                writeln!(w, "{line}")?;
            }
            OutputSink::Stdout(out) => {
                writeln!(out.lock(), "{line}")?;
            }
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        match self {
            OutputSink::File(w) => w.flush()?,
            OutputSink::Stdout(out) => out.lock().flush()?,
        }
        Ok(())
    }
}

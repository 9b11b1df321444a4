//! Subcommand implementations.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use sagtag_core::corpus::{normalize_video, parse_comments, Comment, NormalizationConfig};
use sagtag_core::embedding::{load_embeddings, EmbeddingTable};
use sagtag_core::eval::synth::{gen_synthetic, SyntheticSpec};
use sagtag_core::eval::{
    average_precision, bucket_label, density_bucket, h_hit, precision_recall_f1, HScores,
};
use sagtag_core::pipeline::{
    analyze_video, cluster_video, compare_clusterers, corpus_idf, tfidf_tags, topic_summaries,
    IdfMode,
};

use crate::records::{
    read_jsonl, CommentRecord, GoldRecord, OutputSink, PlantedRecord, TagRecord, TagRecordIn,
};
use crate::{ClusterArgs, CompareArgs, EvalArgs, ExtractArgs, GenArgs, PipelineArgs};

const OK: ExitCode = ExitCode::SUCCESS;

/// Exit status for an evaluation that found mismatched inputs.
fn eval_mismatch() -> ExitCode {
    ExitCode::from(1)
}

fn load_corpus(
    input: &Path,
    norm_config: Option<&PathBuf>,
) -> Result<Vec<(String, Vec<Comment>)>> {
    let cfg = match norm_config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            NormalizationConfig::from_json(&text)
                .with_context(|| format!("bad normalization config {}", path.display()))?
        }
        None => NormalizationConfig::plain(),
    };
    let file =
        File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let videos = parse_comments(file)
        .with_context(|| format!("parsing {}", input.display()))?;
    Ok(videos
        .into_iter()
        .map(|(video_id, raws)| {
            let comments = normalize_video(&raws, &cfg);
            (video_id, comments)
        })
        .collect())
}

fn load_table(args: &PipelineArgs) -> Result<EmbeddingTable> {
    load_embeddings(&args.embeddings)
        .with_context(|| format!("missing or unreadable embeddings {}", args.embeddings.display()))
}

/// Run `f` over the videos concurrently, preserving input order.
fn par_map<T: Send, F: Fn(&(String, Vec<Comment>)) -> T + Sync>(
    jobs: Option<usize>,
    videos: &[(String, Vec<Comment>)],
    f: F,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    Ok(pool.install(|| videos.par_iter().map(|v| f(v)).collect()))
}

pub fn extract(args: ExtractArgs) -> Result<ExitCode> {
    let config = args.pipeline.config();
    let table = load_table(&args.pipeline)?;
    let videos = load_corpus(&args.input, args.pipeline.norm_config.as_ref())?;
    let shared_idf = match config.idf_mode {
        IdfMode::Corpus => Some(corpus_idf(videos.iter().map(|(_, c)| c.as_slice()))),
        IdfMode::PerVideo => None,
    };

    let params_echo = serde_json::to_value(&config)?;
    let records: Vec<TagRecord> = par_map(args.pipeline.jobs, &videos, |(video_id, comments)| {
        if comments.is_empty() {
            eprintln!("warning: video {video_id} has no comments, emitting empty tag list");
        }
        if args.method == "tfidf" {
            TagRecord {
                video_id: video_id.clone(),
                method: args.method.clone(),
                n_comments: comments.len(),
                density: sagtag_core::pipeline::video_density(comments),
                clusterer: None,
                tags: tfidf_tags(comments, &config, shared_idf.as_ref()),
                params: params_echo.clone(),
                topics: None,
            }
        } else {
            let analysis = analyze_video(video_id, comments, &table, &config, shared_idf.as_ref());
            let topics = args
                .topics
                .then(|| topic_summaries(comments, &analysis, 3));
            TagRecord {
                video_id: video_id.clone(),
                method: args.method.clone(),
                n_comments: analysis.n_comments,
                density: analysis.density,
                clusterer: Some(analysis.clusterer),
                tags: analysis.tags,
                params: params_echo.clone(),
                topics,
            }
        }
    })?;

    let mut sink = OutputSink::create(args.output.as_ref())?;
    for record in &records {
        sink.write_json_line(record)?;
    }
    sink.flush()?;
    Ok(OK)
}

pub fn cluster(args: ClusterArgs) -> Result<ExitCode> {
    let config = args.pipeline.config();
    let table = load_table(&args.pipeline)?;
    let videos = load_corpus(&args.input, args.pipeline.norm_config.as_ref())?;

    let reports = par_map(args.pipeline.jobs, &videos, |(video_id, comments)| {
        cluster_video(video_id, comments, &table, &config, args.dump_graph, args.trace)
    })?;

    let mut sink = OutputSink::create(args.output.as_ref())?;
    for report in &reports {
        sink.write_json_line(report)?;
    }
    sink.flush()?;
    Ok(OK)
}

#[derive(Serialize)]
struct KAggregate {
    k: usize,
    precision: f64,
    recall: f64,
    f1: f64,
}

#[derive(Serialize)]
struct BucketAggregate {
    bucket: String,
    videos: usize,
    map: f64,
    at: Vec<KAggregate>,
}

#[derive(Serialize)]
struct EvalSummary {
    videos_evaluated: usize,
    map: f64,
    at: Vec<KAggregate>,
    missing_from_tags: Vec<String>,
    tags_without_gold: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    per_bucket: Vec<BucketAggregate>,
}

struct VideoEval {
    video_id: String,
    density: Option<f64>,
    ap: f64,
    /// One `(precision, recall, f1)` per requested cutoff.
    at: Vec<(f64, f64, f64)>,
}

pub fn eval(args: EvalArgs) -> Result<ExitCode> {
    if args.k.is_empty() || args.k.contains(&0) {
        bail!("k cutoffs must be positive");
    }
    let tag_records: Vec<TagRecordIn> = read_jsonl(&args.tags)?;
    let gold_records: Vec<GoldRecord> = read_jsonl(&args.gold)?;

    let mut by_video: HashMap<&str, &TagRecordIn> = HashMap::new();
    for record in &tag_records {
        by_video.insert(record.video_id.as_str(), record);
    }

    let mut evals: Vec<VideoEval> = Vec::new();
    let mut missing: Vec<String> = Vec::new();
    for gold in &gold_records {
        if gold.tags.is_empty() {
            bail!("gold record for {} has no tags", gold.video_id);
        }
        let mut unique = Vec::new();
        let mut seen = HashSet::new();
        for tag in &gold.tags {
            if seen.insert(tag.as_str()) {
                unique.push(tag.clone());
            } else {
                eprintln!("warning: duplicate gold tag {tag:?} for {}", gold.video_id);
            }
        }
        let Some(record) = by_video.get(gold.video_id.as_str()) else {
            missing.push(gold.video_id.clone());
            continue;
        };
        let ranked: Vec<&str> = record.tags.iter().map(|t| t.word.as_str()).collect();
        let ap = average_precision(&ranked, &unique)?;
        let at = args
            .k
            .iter()
            .map(|&k| {
                let prf = precision_recall_f1(&ranked, &unique, k)?;
                Ok((prf.precision, prf.recall, prf.f1))
            })
            .collect::<Result<Vec<_>>>()?;
        evals.push(VideoEval {
            video_id: gold.video_id.clone(),
            density: record.density,
            ap,
            at,
        });
    }

    let gold_ids: HashSet<&str> = gold_records.iter().map(|g| g.video_id.as_str()).collect();
    let tags_without_gold = tag_records
        .iter()
        .filter(|t| !gold_ids.contains(t.video_id.as_str()))
        .count();

    if let Some(csv_path) = &args.csv {
        write_eval_csv(csv_path, &args.k, &evals)?;
    }

    let aggregate = |subset: &[&VideoEval]| -> (f64, Vec<KAggregate>) {
        let n = subset.len() as f64;
        let map = subset.iter().map(|e| e.ap).sum::<f64>() / n;
        let at = args
            .k
            .iter()
            .enumerate()
            .map(|(idx, &k)| KAggregate {
                k,
                precision: subset.iter().map(|e| e.at[idx].0).sum::<f64>() / n,
                recall: subset.iter().map(|e| e.at[idx].1).sum::<f64>() / n,
                f1: subset.iter().map(|e| e.at[idx].2).sum::<f64>() / n,
            })
            .collect();
        (map, at)
    };

    let all: Vec<&VideoEval> = evals.iter().collect();
    let (map, at) = if all.is_empty() {
        (0.0, Vec::new())
    } else {
        aggregate(&all)
    };

    let mut buckets: BTreeMap<usize, Vec<&VideoEval>> = BTreeMap::new();
    for e in &evals {
        if let Some(d) = e.density {
            buckets.entry(density_bucket(d)).or_default().push(e);
        }
    }
    let per_bucket = buckets
        .into_iter()
        .map(|(bucket, subset)| {
            let (map, at) = aggregate(&subset);
            BucketAggregate {
                bucket: bucket_label(bucket),
                videos: subset.len(),
                map,
                at,
            }
        })
        .collect();

    missing.sort();
    let summary = EvalSummary {
        videos_evaluated: evals.len(),
        map,
        at,
        missing_from_tags: missing.clone(),
        tags_without_gold,
        per_bucket,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);

    if missing.is_empty() {
        Ok(OK)
    } else {
        eprintln!(
            "error: {} gold video(s) missing from the tags file: {}",
            missing.len(),
            missing.join(", ")
        );
        Ok(eval_mismatch())
    }
}

fn write_eval_csv(path: &Path, ks: &[usize], evals: &[VideoEval]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "video_id,k,precision,recall,f1,ap")?;
    for e in evals {
        for (idx, &k) in ks.iter().enumerate() {
            let (p, r, f1) = e.at[idx];
            writeln!(w, "{},{},{},{},{},{}", e.video_id, k, p, r, f1, e.ap)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CompareBucketRow {
    bucket: String,
    videos: usize,
    d_hit: usize,
    t_hit: usize,
}

#[derive(Serialize)]
struct CompareSummary {
    videos: usize,
    skipped: Vec<String>,
    buckets: Vec<CompareBucketRow>,
}

pub fn compare(args: CompareArgs) -> Result<ExitCode> {
    let config = args.pipeline.config();
    let table = load_table(&args.pipeline)?;
    let videos = load_corpus(&args.input, args.pipeline.norm_config.as_ref())?;

    let outcomes = par_map(args.pipeline.jobs, &videos, |(video_id, comments)| {
        (
            video_id.clone(),
            compare_clusterers(comments, &table, &config),
        )
    })?;

    let mut scores: Vec<HScores> = Vec::new();
    let mut detail: Vec<(String, HScores)> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();
    for (video_id, outcome) in outcomes {
        match outcome {
            Ok(h) => {
                scores.push(h);
                detail.push((video_id, h));
            }
            Err(err) => {
                eprintln!("warning: skipping {video_id}: {err}");
                skipped.push(video_id);
            }
        }
    }

    if let Some(csv_path) = &args.csv {
        let file = File::create(csv_path)
            .with_context(|| format!("cannot create {}", csv_path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "video_id,density,bucket,h_dialogue,h_topic,winner")?;
        for (video_id, h) in &detail {
            let winner = if h.h_dialogue > h.h_topic {
                "dialogue"
            } else if h.h_topic > h.h_dialogue {
                "topic-center"
            } else {
                "tie"
            };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                video_id,
                h.density,
                bucket_label(density_bucket(h.density)),
                h.h_dialogue,
                h.h_topic,
                winner
            )?;
        }
        w.flush()?;
    }

    let table_counts = h_hit(&scores);
    let buckets = table_counts
        .iter()
        .enumerate()
        .map(|(idx, counts)| CompareBucketRow {
            bucket: bucket_label(idx),
            videos: counts.videos,
            d_hit: counts.d_hit,
            t_hit: counts.t_hit,
        })
        .collect();
    let summary = CompareSummary {
        videos: scores.len(),
        skipped,
        buckets,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(OK)
}

pub fn gen(args: GenArgs) -> Result<ExitCode> {
    if args.videos == 0 {
        bail!("need at least one video");
    }
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;

    let mut comment_lines: Vec<String> = Vec::new();
    let mut gold: Vec<GoldRecord> = Vec::new();
    let mut planted: Vec<PlantedRecord> = Vec::new();
    let mut all_vectors: Vec<(String, Vec<f64>)> = Vec::new();

    for v in 0..args.videos {
        let spec = SyntheticSpec {
            topics: args.topics,
            comments_per_topic: args.comments_per_topic,
            vocab_per_topic: args.vocab_per_topic,
            density: args.density,
            noise_fraction: args.noise_fraction,
            seed: args.seed + v as u64,
            dim: args.dim,
            word_prefix: if args.videos > 1 {
                format!("v{v}_")
            } else {
                String::new()
            },
        };
        let video = gen_synthetic(&spec)?;
        for comment in &video.comments {
            let record = CommentRecord {
                video_id: &video.video_id,
                t: comment.t,
                tokens: &comment.tokens,
            };
            comment_lines.push(serde_json::to_string(&record)?);
        }
        gold.push(GoldRecord {
            video_id: video.video_id.clone(),
            tags: video.gold_tags.clone(),
        });
        planted.push(PlantedRecord {
            video_id: video.video_id.clone(),
            assignment: video.planted.assignment.clone(),
        });
        for (word, vec) in video.embeddings.iter() {
            all_vectors.push((word.to_string(), vec.to_vec()));
        }
    }

    let dim = args.dim;
    let merged = EmbeddingTable::from_pairs(dim, all_vectors);

    write_lines(&args.out_dir.join("comments.jsonl"), &comment_lines)?;
    fs::write(args.out_dir.join("embeddings.txt"), merged.to_text())?;
    let gold_lines = gold
        .iter()
        .map(serde_json::to_string)
        .collect::<Result<Vec<_>, _>>()?;
    write_lines(&args.out_dir.join("gold.jsonl"), &gold_lines)?;
    let planted_lines = planted
        .iter()
        .map(serde_json::to_string)
        .collect::<Result<Vec<_>, _>>()?;
    write_lines(&args.out_dir.join("planted.jsonl"), &planted_lines)?;

    eprintln!(
        "wrote {} video(s), {} comments, {} words to {}",
        args.videos,
        comment_lines.len(),
        merged.len(),
        args.out_dir.display()
    );
    Ok(OK)
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

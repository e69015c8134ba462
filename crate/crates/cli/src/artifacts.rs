//! Intermediate artifacts passed between stages through the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use corpus_lens::report::write_bytes;
use corpus_lens::{Polarity, Region};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CORPUS: &str = "corpus.jsonl";
pub const REJECTS: &str = "rejects.jsonl";
pub const INGEST_SUMMARY: &str = "ingest.json";
pub const POST_SCORES: &str = "sentiment_posts.jsonl";
pub const COMMENT_SCORES: &str = "sentiment_comments.jsonl";
pub const ASPECT_ASSIGNMENTS: &str = "aspects.jsonl";
pub const ASPECT_SUMMARY: &str = "aspect_summary.csv";
pub const TOPICS: &str = "topics.json";
pub const TOPIC_ASSIGNMENTS: &str = "topic_assignments.jsonl";
pub const TESTS_DIR: &str = "tests";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentDoc {
    pub id: String,
    pub text: String,
}

/// A retained thread with its geography attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadDoc {
    pub id: String,
    pub subreddit: String,
    pub region: Region,
    pub unit: String,
    pub city: Option<String>,
    pub text: String,
    pub comments: Vec<CommentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostScore {
    pub id: String,
    pub region: Region,
    pub unit: String,
    pub city: Option<String>,
    pub compound: f64,
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub polarity: Polarity,
    pub n_comments: usize,
    pub comment_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentScore {
    pub id: String,
    pub post_id: String,
    pub region: Region,
    pub unit: String,
    pub city: Option<String>,
    pub compound: f64,
    pub polarity: Polarity,
}

/// Output directory plus the stage that produces each artifact.
pub struct Outdir {
    pub root: PathBuf,
}

impl Outdir {
    pub fn new(root: &Path) -> Self {
        Outdir { root: root.to_path_buf() }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Fails with a config-class error naming `stage` when `rel` is absent.
    pub fn require(&self, rel: &str, stage: &'static str) -> Result<PathBuf> {
        let p = self.path(rel);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CliError::MissingArtifact {
                artifact: rel.to_string(),
                outdir: self.root.clone(),
                stage,
            })
        }
    }

    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        Ok(write_bytes(&self.path(rel), bytes)?)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, rel: &str, value: &T) -> Result<()> {
        self.write(rel, corpus_lens::report::to_json_string(value).as_bytes())
    }

    pub fn write_jsonl<T: Serialize>(&self, rel: &str, records: &[T]) -> Result<()> {
        let mut out = String::new();
        for r in records {
            out.push_str(&serde_json::to_string(r).map_err(|e| CliError::Data(e.to_string()))?);
            out.push('\n');
        }
        self.write(rel, out.as_bytes())
    }

    pub fn read_jsonl<T: DeserializeOwned>(&self, rel: &str, stage: &'static str) -> Result<Vec<T>> {
        let p = self.require(rel, stage)?;
        let text = fs::read_to_string(&p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        text.lines()
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| CliError::Data(format!("{} line {}: {e}", p.display(), i + 1)))
            })
            .collect()
    }

    pub fn read_json<T: DeserializeOwned>(&self, rel: &str, stage: &'static str) -> Result<T> {
        let p = self.require(rel, stage)?;
        let text = fs::read_to_string(&p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
    }
}

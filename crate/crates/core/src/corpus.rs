//! Post/comment ingestion, thread linking, geography and inclusion filters.
//!
//! Ingestion never drops a line silently: every line of an input file ends up
//! either as a record (possibly superseded by a later duplicate) or as a
//! [`Reject`] carrying its 1-based line number.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::{self, DeserializeOwned, Deserializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{contains_phrase, normalize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid geo map {path}: {reason}")]
    GeoMap { path: PathBuf, reason: String },
    #[error("keyword list must not be empty")]
    EmptyKeywords,
    #[error("minimum count threshold must be at least 1")]
    InvalidThreshold,
}

fn unix_seconds<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
    // dumps deliver either integers or floats like 1635000000.0
    let v = serde_json::Number::deserialize(d)?;
    if let Some(i) = v.as_i64() {
        return Ok(i);
    }
    match v.as_f64() {
        Some(f) if f.is_finite() && f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
        _ => Err(de::Error::custom(format!("created_utc is not an integral timestamp: {v}"))),
    }
}

fn nullable_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    Ok(Option::<String>::deserialize(d)?.unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub subreddit: String,
    pub title: String,
    #[serde(deserialize_with = "nullable_string")]
    pub selftext: String,
    #[serde(deserialize_with = "nullable_string")]
    pub author: String,
    #[serde(deserialize_with = "unix_seconds")]
    pub created_utc: i64,
    pub num_comments: u64,
    pub score: i64,
    pub upvote_ratio: f64,
    #[serde(rename = "permalink", default, skip_serializing_if = "Option::is_none")]
    pub source_link: Option<String>,
}

impl Post {
    /// Title and body joined by a space; the title alone when the body is blank.
    pub fn analysis_text(&self) -> String {
        if self.selftext.trim().is_empty() {
            self.title.clone()
        } else {
            format!("{} {}", self.title, self.selftext)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub comment_id: String,
    pub parent_id: String,
    #[serde(deserialize_with = "nullable_string")]
    pub body: String,
    #[serde(deserialize_with = "nullable_string")]
    pub author: String,
    #[serde(deserialize_with = "unix_seconds")]
    pub created_utc: i64,
    pub score: i64,
}

impl Comment {
    pub fn analysis_text(&self) -> &str {
        &self.body
    }
}

/// A JSONL record type with a unique key and field-level invariants.
pub trait Record: DeserializeOwned + Send {
    fn key(&self) -> &str;
    fn validate(&self) -> Result<(), String>;
}

impl Record for Post {
    fn key(&self) -> &str {
        &self.id
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if !(0.0..=1.0).contains(&self.upvote_ratio) {
            return Err(format!("upvote_ratio {} outside [0, 1]", self.upvote_ratio));
        }
        if self.created_utc <= 0 {
            return Err(format!("created_utc {} is not positive", self.created_utc));
        }
        Ok(())
    }
}

impl Record for Comment {
    fn key(&self) -> &str {
        &self.comment_id
    }

    fn validate(&self) -> Result<(), String> {
        if self.comment_id.is_empty() {
            return Err("empty comment_id".into());
        }
        if self.parent_id.is_empty() {
            return Err("empty parent_id".into());
        }
        if self.created_utc <= 0 {
            return Err(format!("created_utc {} is not positive", self.created_utc));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub file: String,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Loaded<T> {
    /// Unique records sorted by key.
    pub records: Vec<T>,
    pub rejects: Vec<Reject>,
    /// Valid lines superseded by a later line with the same key.
    pub duplicates: usize,
    pub total_lines: usize,
}

impl<T> Loaded<T> {
    pub fn valid_lines(&self) -> usize {
        self.records.len() + self.duplicates
    }
}

fn parse_line<T: Record>(line: &str) -> Result<T, String> {
    if line.trim().is_empty() {
        return Err("blank line".into());
    }
    let rec: T = serde_json::from_str(line).map_err(|e| e.to_string())?;
    rec.validate()?;
    Ok(rec)
}

/// Parses JSONL content. `file` is only used to label rejects.
pub fn parse_jsonl<T: Record>(content: &str, file: &str) -> Loaded<T> {
    let mut lines: Vec<&str> = content.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let parsed: Vec<Result<T, String>> = lines
        .par_iter()
        .map(|l| parse_line::<T>(l.strip_suffix('\r').unwrap_or(l)))
        .collect();

    let mut by_key: HashMap<String, T> = HashMap::new();
    let mut rejects = Vec::new();
    let mut duplicates = 0;
    for (i, res) in parsed.into_iter().enumerate() {
        match res {
            Ok(rec) => {
                if by_key.insert(rec.key().to_string(), rec).is_some() {
                    duplicates += 1;
                }
            }
            Err(reason) => rejects.push(Reject {
                file: file.to_string(),
                line: i + 1,
                reason,
            }),
        }
    }
    let mut records: Vec<T> = by_key.into_values().collect();
    records.sort_by(|a, b| a.key().cmp(b.key()));
    Loaded {
        records,
        rejects,
        duplicates,
        total_lines: lines.len(),
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_posts(path: &Path) -> Result<Loaded<Post>, CorpusError> {
    Ok(parse_jsonl(&read(path)?, &path.display().to_string()))
}

pub fn load_comments(path: &Path) -> Result<Loaded<Comment>, CorpusError> {
    Ok(parse_jsonl(&read(path)?, &path.display().to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "EU")]
    Eu,
    #[serde(rename = "US")]
    Us,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Eu => "EU",
            Region::Us => "US",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoUnit {
    pub region: Region,
    pub unit: String,
    pub city: Option<String>,
    pub subreddit: String,
}

#[derive(Debug, Clone, Deserialize)]
struct GeoEntry {
    region: Region,
    unit: String,
    #[serde(default)]
    city: Option<String>,
}

/// Subreddit → geography mapping. Lookups are case-insensitive on the subreddit name.
#[derive(Debug, Clone, Default)]
pub struct GeoMap {
    entries: BTreeMap<String, GeoUnit>,
}

impl GeoMap {
    pub fn parse(json: &str) -> Result<Self, String> {
        let raw: BTreeMap<String, GeoEntry> =
            serde_json::from_str(json).map_err(|e| e.to_string())?;
        let mut entries = BTreeMap::new();
        for (sub, e) in raw {
            if e.unit.trim().is_empty() {
                return Err(format!("subreddit {sub:?} has an empty unit"));
            }
            let key = sub.to_lowercase();
            let unit = GeoUnit {
                region: e.region,
                unit: e.unit,
                city: e.city.filter(|c| !c.trim().is_empty()),
                subreddit: sub,
            };
            if entries.insert(key, unit).is_some() {
                return Err("subreddit names collide case-insensitively".into());
            }
        }
        Ok(GeoMap { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::parse(&read(path)?).map_err(|reason| CorpusError::GeoMap {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn lookup(&self, subreddit: &str) -> Option<&GeoUnit> {
        self.entries.get(&subreddit.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thread {
    pub post: Post,
    /// Ascending `created_utc`, ties by `comment_id`.
    pub comments: Vec<Comment>,
}

#[derive(Debug, Clone)]
pub struct Linked {
    /// One thread per post, in post-id order.
    pub threads: Vec<Thread>,
    pub orphans: Vec<Comment>,
}

pub fn link_threads(posts: &[Post], comments: &[Comment]) -> Linked {
    let mut slot: HashMap<&str, usize> = HashMap::with_capacity(posts.len());
    let mut threads: Vec<Thread> = Vec::with_capacity(posts.len());
    let mut sorted_posts: Vec<&Post> = posts.iter().collect();
    sorted_posts.sort_by(|a, b| a.id.cmp(&b.id));
    for p in sorted_posts {
        slot.insert(p.id.as_str(), threads.len());
        threads.push(Thread {
            post: p.clone(),
            comments: Vec::new(),
        });
    }
    let mut orphans = Vec::new();
    for c in comments {
        match slot.get(c.parent_id.as_str()) {
            Some(&i) => threads[i].comments.push(c.clone()),
            None => orphans.push(c.clone()),
        }
    }
    for t in &mut threads {
        t.comments.sort_by(|a, b| {
            a.created_utc
                .cmp(&b.created_utc)
                .then_with(|| a.comment_id.cmp(&b.comment_id))
        });
    }
    orphans.sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
    Linked { threads, orphans }
}

/// Keeps posts whose normalized analysis text contains at least one keyword
/// as a whole token (or contiguous token run for multi-word keywords).
pub fn keyword_filter(posts: &[Post], keywords: &[String]) -> Result<Vec<Post>, CorpusError> {
    let phrases: Vec<Vec<String>> = keywords
        .iter()
        .map(|k| normalize(k))
        .filter(|p| !p.is_empty())
        .collect();
    if phrases.is_empty() {
        return Err(CorpusError::EmptyKeywords);
    }
    Ok(posts
        .par_iter()
        .filter(|p| {
            let toks = normalize(&p.analysis_text());
            phrases.iter().any(|ph| contains_phrase(&toks, ph))
        })
        .cloned()
        .collect())
}

/// Retains groups with at least `threshold` members.
pub fn min_count_filter<K: Ord, V>(
    groups: BTreeMap<K, Vec<V>>,
    threshold: usize,
) -> Result<BTreeMap<K, Vec<V>>, CorpusError> {
    if threshold == 0 {
        return Err(CorpusError::InvalidThreshold);
    }
    Ok(groups
        .into_iter()
        .filter(|(_, v)| v.len() >= threshold)
        .collect())
}

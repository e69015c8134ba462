//! Topic discovery: document embeddings, HDBSCAN clustering, class-based
//! TF-IDF keywords and per-topic sentiment.

mod ctfidf;
mod embed;
mod hdbscan;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use ctfidf::{ctfidf_terms, TermWeight};
pub use embed::{fallback_embed, load_embeddings, parse_embeddings, pca_reduce, EmbeddingMatrix};
pub use hdbscan::{hdbscan, hdbscan_rows, mutual_reachability_mst, ClusterLabels, Edge, HdbscanParams};

use crate::text::{content_tokens, Stopwords};

#[derive(Debug, Error, PartialEq)]
pub enum TopicError {
    #[error("{0}")]
    Io(String),
    #[error("embeddings line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("row {doc_id}: expected dimension {expected}, got {got}")]
    Dimension { doc_id: String, expected: usize, got: usize },
    #[error("row {0}: non-finite value")]
    NonFinite(String),
    #[error("zero vector cannot be normalized (doc {0})")]
    ZeroVector(String),
    #[error("{ids} doc ids but {rows} rows")]
    CountMismatch { ids: usize, rows: usize },
    #[error("{n} points is fewer than min_cluster_size {min_cluster_size}")]
    TooFewPoints { n: usize, min_cluster_size: usize },
    #[error("{0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopicStat {
    pub topic_id: usize,
    pub n: usize,
    pub mean: f64,
}

/// Count and mean compound per topic; noise is excluded.
pub fn topic_sentiment(labels: &[i64], sentiments: &[f64]) -> Result<Vec<TopicStat>, TopicError> {
    if labels.len() != sentiments.len() {
        return Err(TopicError::CountMismatch { ids: labels.len(), rows: sentiments.len() });
    }
    let mut acc: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&l, &s) in labels.iter().zip(sentiments) {
        if l >= 0 {
            acc.entry(l as usize).or_default().push(s);
        }
    }
    Ok(acc
        .into_iter()
        .map(|(topic_id, v)| TopicStat { topic_id, n: v.len(), mean: v.iter().sum::<f64>() / v.len() as f64 })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub n: usize,
    pub mean_sentiment: f64,
    pub terms: Vec<TermWeight>,
}

/// Joins cluster labels, document texts and compounds into ranked topic summaries.
pub fn summarize_topics<S: AsRef<str>>(
    labels: &ClusterLabels,
    texts: &[S],
    sentiments: &[f64],
    stopwords: &Stopwords,
    top_k: usize,
) -> Result<Vec<TopicSummary>, TopicError> {
    if texts.len() != labels.labels.len() {
        return Err(TopicError::CountMismatch { ids: labels.labels.len(), rows: texts.len() });
    }
    let stats = topic_sentiment(&labels.labels, sentiments)?;
    let mut grouped: Vec<Vec<Vec<String>>> = vec![Vec::new(); labels.k];
    for (&l, t) in labels.labels.iter().zip(texts) {
        if l >= 0 {
            grouped[l as usize].push(content_tokens(t.as_ref(), stopwords));
        }
    }
    let terms = ctfidf_terms(&grouped, top_k);
    Ok(stats
        .into_iter()
        .zip(terms)
        .map(|(s, terms)| TopicSummary { topic_id: s.topic_id, n: s.n, mean_sentiment: s.mean, terms })
        .collect())
}

use std::collections::{BTreeMap, HashMap};

use corpus_lens::topics::{
    fallback_embed, hdbscan, load_embeddings, pca_reduce, summarize_topics, EmbeddingMatrix, HdbscanParams,
    TermWeight, TopicError,
};
use corpus_lens::Region;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Ctx;
use crate::artifacts::{PostScore, ThreadDoc, CORPUS, POST_SCORES, TOPICS, TOPIC_ASSIGNMENTS};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub topic_id: usize,
    pub n: usize,
    /// Fraction of the region's documents (noise included in the denominator).
    pub share: f64,
    pub mean_sentiment: f64,
    pub terms: Vec<TermWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionTopics {
    pub n_docs: usize,
    pub n_topics: usize,
    pub n_noise: usize,
    pub noise_fraction: f64,
    pub topics: Vec<TopicRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionOutcome {
    Fitted(RegionTopics),
    Skipped { skipped: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsFile {
    pub embedding: String,
    pub params: serde_json::Value,
    pub regions: BTreeMap<String, RegionOutcome>,
}

#[derive(Debug, Serialize)]
struct Assignment<'a> {
    doc_id: &'a str,
    region: Region,
    topic: i64,
}

fn region_matrix(ctx: &Ctx, supplied: Option<&EmbeddingMatrix>, docs: &[&ThreadDoc]) -> Result<EmbeddingMatrix> {
    let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    let m = match supplied {
        Some(all) => {
            let slot: HashMap<&str, usize> = all.doc_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
            let mut idx = Vec::with_capacity(ids.len());
            let mut missing = Vec::new();
            for id in &ids {
                match slot.get(id.as_str()) {
                    Some(&i) => idx.push(i),
                    None => missing.push(id.as_str()),
                }
            }
            if !missing.is_empty() {
                return Err(CliError::Data(format!(
                    "{} documents have no embedding (first: {})",
                    missing.len(),
                    missing[0]
                )));
            }
            all.select(&idx)
        }
        None => {
            let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
            fallback_embed(&ids, &texts, ctx.cfg.embed_dim, ctx.cfg.seed, &ctx.stopwords()?)?
        }
    };
    if ctx.cfg.pca_dim > 0 && ctx.cfg.pca_dim < m.dim {
        Ok(pca_reduce(&m, ctx.cfg.pca_dim)?)
    } else {
        Ok(m)
    }
}

pub fn run(ctx: &Ctx) -> Result<Vec<String>> {
    let docs: Vec<ThreadDoc> = ctx.out.read_jsonl(CORPUS, "ingest")?;
    let scores: Vec<PostScore> = ctx.out.read_jsonl(POST_SCORES, "sentiment")?;
    let compound: HashMap<&str, f64> = scores.iter().map(|s| (s.id.as_str(), s.compound)).collect();
    let stopwords = ctx.stopwords()?;
    let supplied = match &ctx.cfg.embeddings {
        Some(p) => Some(load_embeddings(p, ctx.cfg.raw_embeddings)?),
        None => None,
    };
    let params = HdbscanParams { min_cluster_size: ctx.cfg.min_cluster_size, min_samples: ctx.cfg.min_samples };

    let mut by_region: BTreeMap<Region, Vec<&ThreadDoc>> = BTreeMap::new();
    for d in &docs {
        by_region.entry(d.region).or_default().push(d);
    }

    let mut regions = BTreeMap::new();
    let mut assignments = Vec::new();
    for (region, rdocs) in &by_region {
        let m = region_matrix(ctx, supplied.as_ref(), rdocs)?;
        let labels = match hdbscan(&m, params) {
            Ok(l) => l,
            Err(e @ TopicError::TooFewPoints { .. }) => {
                regions.insert(region.to_string(), RegionOutcome::Skipped { skipped: e.to_string() });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let texts: Vec<&str> = rdocs.iter().map(|d| d.text.as_str()).collect();
        let sentiments = rdocs
            .iter()
            .map(|d| {
                compound
                    .get(d.id.as_str())
                    .copied()
                    .ok_or_else(|| CliError::Data(format!("no sentiment score for post {}", d.id)))
            })
            .collect::<Result<Vec<f64>>>()?;
        let summaries = summarize_topics(&labels, &texts, &sentiments, &stopwords, ctx.cfg.top_k)?;
        let n_docs = rdocs.len();
        let n_noise = labels.labels.iter().filter(|&&l| l < 0).count();
        regions.insert(
            region.to_string(),
            RegionOutcome::Fitted(RegionTopics {
                n_docs,
                n_topics: labels.k,
                n_noise,
                noise_fraction: n_noise as f64 / n_docs as f64,
                topics: summaries
                    .into_iter()
                    .map(|s| TopicRow {
                        topic_id: s.topic_id,
                        n: s.n,
                        share: s.n as f64 / n_docs as f64,
                        mean_sentiment: s.mean_sentiment,
                        terms: s.terms,
                    })
                    .collect(),
            }),
        );
        for (d, &l) in rdocs.iter().zip(&labels.labels) {
            assignments.push(Assignment { doc_id: &d.id, region: *region, topic: l });
        }
        eprintln!("topics: {region}: {} topics over {n_docs} posts ({n_noise} noise)", labels.k);
    }

    let file = TopicsFile {
        embedding: if supplied.is_some() { "file" } else { "hashed-tfidf" }.into(),
        params: json!({
            "min_cluster_size": params.min_cluster_size,
            "min_samples": params.min_samples,
            "top_k": ctx.cfg.top_k,
            "embed_dim": ctx.cfg.embed_dim,
            "pca_dim": ctx.cfg.pca_dim,
            "seed": ctx.cfg.seed,
        }),
        regions,
    };
    ctx.out.write_json(TOPICS, &file)?;
    ctx.out.write_jsonl(TOPIC_ASSIGNMENTS, &assignments)?;
    Ok(vec![TOPICS.into(), TOPIC_ASSIGNMENTS.into()])
}

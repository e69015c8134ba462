use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

/// Class-based TF-IDF: `tf(t,c) · ln(1 + A / tf(t))`, where `tf(t)` is the
/// corpus count and `A` the average number of tokens per cluster.
///
/// `clusters[c]` holds the token lists of cluster `c`'s documents. Returns up
/// to `top_k` terms per cluster by descending weight, ties by term.
pub fn ctfidf_terms(clusters: &[Vec<Vec<String>>], top_k: usize) -> Vec<Vec<TermWeight>> {
    let counts: Vec<BTreeMap<&str, usize>> = clusters
        .iter()
        .map(|docs| {
            let mut m = BTreeMap::new();
            for t in docs.iter().flatten() {
                *m.entry(t.as_str()).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let mut corpus: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0usize;
    for m in &counts {
        for (t, c) in m {
            *corpus.entry(t).or_insert(0) += c;
            total += c;
        }
    }
    let avg = if clusters.is_empty() { 0.0 } else { total as f64 / clusters.len() as f64 };
    counts
        .iter()
        .map(|m| {
            let mut w: Vec<TermWeight> = m
                .iter()
                .map(|(t, &c)| TermWeight {
                    term: t.to_string(),
                    weight: c as f64 * (1.0 + avg / corpus[t] as f64).ln(),
                })
                .collect();
            w.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
            w.truncate(top_k);
            w
        })
        .collect()
}

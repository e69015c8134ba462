//! Aggregation of scored documents into summary tables, word frequencies and
//! distribution data, plus byte-deterministic CSV/JSON export.

mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use table::{fixed6, to_json_string, write_bytes, write_json, Cell, Table};

use crate::sentiment::{classify_at, Polarity, POLARITY_THRESHOLD};
use crate::stats::describe::{mean, quantile_sorted, sorted, std_population, std_sample};
use crate::stats::PairwiseMatrix;
use crate::text::{content_tokens, Stopwords};

pub const DEFAULT_BINS: usize = 40;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("group {0} has no documents")]
    EmptyGroup(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Posts,
    Comments,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Posts => "posts",
            Kind::Comments => "comments",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    /// "region", "unit" or "city".
    pub level: String,
    pub scope: String,
    pub kind: Kind,
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub std_sample: Option<f64>,
    pub pct_positive: f64,
    pub pct_negative: f64,
}

/// One row per group; percentages use the polarity thresholds.
pub fn sentiment_summary(
    level: &str,
    kind: Kind,
    groups: &BTreeMap<String, Vec<f64>>,
) -> Result<Vec<SummaryRow>, ReportError> {
    sentiment_summary_at(level, kind, groups, POLARITY_THRESHOLD)
}

/// As [`sentiment_summary`] with a custom symmetric polarity threshold.
pub fn sentiment_summary_at(
    level: &str,
    kind: Kind,
    groups: &BTreeMap<String, Vec<f64>>,
    threshold: f64,
) -> Result<Vec<SummaryRow>, ReportError> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(ReportError::Invalid(format!("polarity threshold {threshold} outside [0, 1)")));
    }
    groups
        .iter()
        .map(|(scope, v)| {
            if v.is_empty() {
                return Err(ReportError::EmptyGroup(scope.clone()));
            }
            let (mut pos, mut neg) = (0usize, 0usize);
            for &c in v {
                match classify_at(c, threshold).map_err(|e| ReportError::Invalid(e.to_string()))? {
                    Polarity::Positive => pos += 1,
                    Polarity::Negative => neg += 1,
                    Polarity::Neutral => {}
                }
            }
            let n = v.len() as f64;
            Ok(SummaryRow {
                level: level.to_string(),
                scope: scope.clone(),
                kind,
                n: v.len(),
                mean: mean(v),
                std: std_population(v),
                std_sample: std_sample(v),
                pct_positive: 100.0 * pos as f64 / n,
                pct_negative: 100.0 * neg as f64 / n,
            })
        })
        .collect()
}

pub fn summary_table(rows: &[SummaryRow]) -> Table {
    let mut t = Table::new(["level", "scope", "kind", "n", "mean", "std", "std_sample", "pct_positive", "pct_negative"]);
    for r in rows {
        t.push(vec![
            r.level.as_str().into(),
            r.scope.as_str().into(),
            r.kind.as_str().into(),
            r.n.into(),
            r.mean.into(),
            r.std.into(),
            r.std_sample.into(),
            r.pct_positive.into(),
            r.pct_negative.into(),
        ]);
    }
    t
}

/// Term counts over content tokens, descending, ties lexicographic.
pub fn word_frequencies<S: AsRef<str>>(texts: &[S], stopwords: &Stopwords) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in texts {
        for tok in content_tokens(t.as_ref(), stopwords) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut v: Vec<(String, usize)> = counts.into_iter().collect();
    // BTreeMap order is lexicographic already; a stable sort keeps it for ties
    v.sort_by(|a, b| b.1.cmp(&a.1));
    v
}

pub fn word_frequency_table(freqs: &[(String, usize)]) -> Table {
    let total: usize = freqs.iter().map(|(_, c)| c).sum();
    let mut t = Table::new(["rank", "term", "count", "relative"]);
    for (i, (term, c)) in freqs.iter().enumerate() {
        t.push(vec![(i + 1).into(), term.as_str().into(), (*c).into(), (*c as f64 / total as f64).into()]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionData {
    pub n: usize,
    /// (value, fraction of values ≤ value) at each distinct value.
    pub ecdf: Vec<(f64, f64)>,
    pub histogram: Histogram,
    pub boxplot: BoxplotStats,
}

/// ECDF, equal-width histogram over [−1, 1] and Tukey boxplot statistics.
pub fn distribution_data(values: &[f64], bins: usize) -> Result<DistributionData, ReportError> {
    if values.is_empty() {
        return Err(ReportError::Invalid("distribution of an empty sample".into()));
    }
    if bins == 0 {
        return Err(ReportError::Invalid("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ReportError::Invalid("non-finite value in distribution".into()));
    }
    let s = sorted(values);
    let n = s.len();
    let mut ecdf = Vec::new();
    for (i, &v) in s.iter().enumerate() {
        if i + 1 == n || s[i + 1] != v {
            ecdf.push((v, (i + 1) as f64 / n as f64));
        }
    }
    let width = 2.0 / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| -1.0 + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &v in &s {
        let b = ((v + 1.0) / width).floor();
        // the top edge belongs to the last bin; out-of-range values are clamped
        let b = if b < 0.0 { 0 } else { (b as usize).min(bins - 1) };
        counts[b] += 1;
    }
    let q1 = quantile_sorted(&s, 0.25);
    let median = quantile_sorted(&s, 0.5);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = s.iter().copied().filter(|v| *v >= lo_fence && *v <= hi_fence).collect();
    let boxplot = BoxplotStats {
        q1,
        median,
        q3,
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: n - inside.len(),
    };
    Ok(DistributionData { n, ecdf, histogram: Histogram { edges, counts }, boxplot })
}

/// Square matrix of adjusted p-values with unit names as header row and column.
pub fn pairwise_table(m: &PairwiseMatrix) -> Table {
    let mut t = Table::new(std::iter::once("unit".to_string()).chain(m.names.iter().cloned()));
    for (i, name) in m.names.iter().enumerate() {
        let mut row = vec![Cell::Text(name.clone())];
        row.extend(m.p_adjusted[i].iter().map(|&p| Cell::Float(p)));
        t.push(row);
    }
    t
}

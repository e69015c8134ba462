use std::collections::HashMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Deserialize;

use super::TopicError;
use crate::text::{content_tokens, Stopwords};

/// Row-major document vectors. Rows flagged `empty` carry no content (an
/// empty text under the fallback embedder) and are never clustered.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub doc_ids: Vec<String>,
    pub dim: usize,
    data: Vec<f64>,
    pub empty: Vec<bool>,
    pub normalized: bool,
}

impl EmbeddingMatrix {
    /// Builds a matrix from rows, checking dimensions and finiteness.
    pub fn from_rows(doc_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, TopicError> {
        if doc_ids.len() != rows.len() {
            return Err(TopicError::CountMismatch { ids: doc_ids.len(), rows: rows.len() });
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (id, r) in doc_ids.iter().zip(&rows) {
            if r.len() != dim {
                return Err(TopicError::Dimension { doc_id: id.clone(), expected: dim, got: r.len() });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(TopicError::NonFinite(id.clone()));
            }
            data.extend_from_slice(r);
        }
        let n = doc_ids.len();
        Ok(EmbeddingMatrix { doc_ids, dim, data, empty: vec![false; n], normalized: false })
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Scales every row to unit length; a zero row is an error.
    pub fn l2_normalize(mut self) -> Result<Self, TopicError> {
        for i in 0..self.len() {
            let row = &mut self.data[i * self.dim..(i + 1) * self.dim];
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(TopicError::ZeroVector(self.doc_ids[i].clone()));
            }
            row.iter_mut().for_each(|v| *v /= norm);
        }
        self.normalized = true;
        Ok(self)
    }

    /// Rows with content, as (original index, row) pairs.
    pub fn active_rows(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.empty[i]).collect()
    }

    /// Keeps the rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> EmbeddingMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        EmbeddingMatrix {
            doc_ids: idx.iter().map(|&i| self.doc_ids[i].clone()).collect(),
            dim: self.dim,
            data,
            empty: idx.iter().map(|&i| self.empty[i]).collect(),
            normalized: self.normalized,
        }
    }
}

#[derive(Deserialize)]
struct JsonRow {
    doc_id: String,
    vector: Vec<f64>,
}

/// Reads embeddings and L2-normalizes them unless `raw`.
///
/// Two layouts are accepted. Text: a header `n d`, then `n` lines of
/// `doc_id v1 ... vd`, whitespace separated. JSONL: one
/// `{"doc_id": "...", "vector": [...]}` object per line.
pub fn load_embeddings(path: &Path, raw: bool) -> Result<EmbeddingMatrix, TopicError> {
    let content = fs::read_to_string(path).map_err(|e| TopicError::Io(format!("{}: {e}", path.display())))?;
    let m = parse_embeddings(&content)?;
    if raw {
        Ok(m)
    } else {
        m.l2_normalize()
    }
}

pub fn parse_embeddings(content: &str) -> Result<EmbeddingMatrix, TopicError> {
    let mut lines = content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((first_no, first)) = lines.next() else {
        return EmbeddingMatrix::from_rows(Vec::new(), Vec::new());
    };
    let parse_err = |line: usize, reason: String| TopicError::Parse { line: line + 1, reason };
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    if first.trim_start().starts_with('{') {
        for (no, line) in std::iter::once((first_no, first)).chain(lines) {
            let r: JsonRow = serde_json::from_str(line).map_err(|e| parse_err(no, e.to_string()))?;
            ids.push(r.doc_id);
            rows.push(r.vector);
        }
        return EmbeddingMatrix::from_rows(ids, rows);
    }
    let header: Vec<&str> = first.split_whitespace().collect();
    let [n, d] = header[..] else {
        return Err(parse_err(first_no, "header must be `n d`".into()));
    };
    let n: usize = n.parse().map_err(|e| parse_err(first_no, format!("row count: {e}")))?;
    let d: usize = d.parse().map_err(|e| parse_err(first_no, format!("dimension: {e}")))?;
    for (no, line) in lines {
        let mut fields = line.split_whitespace();
        let id = fields.next().unwrap_or_default().to_string();
        let row: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(no, format!("{id}: {e}"))))
            .collect::<Result<_, _>>()?;
        if row.len() != d {
            return Err(TopicError::Dimension { doc_id: id, expected: d, got: row.len() });
        }
        ids.push(id);
        rows.push(row);
    }
    if ids.len() != n {
        return Err(TopicError::CountMismatch { ids: n, rows: ids.len() });
    }
    EmbeddingMatrix::from_rows(ids, rows)
}

fn fnv1a(seed: u64, token: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in seed.to_le_bytes().iter().chain(token.as_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Deterministic hashed TF-IDF embedder, used when no embeddings are supplied.
///
/// Each content token lands in bucket `hash(seed, token) mod dim`; weights are
/// term counts times smoothed idf `ln((1 + n) / (1 + df)) + 1`. Texts without
/// content tokens become zero rows flagged `empty`.
pub fn fallback_embed<S: AsRef<str>>(
    doc_ids: &[String],
    texts: &[S],
    dim: usize,
    seed: u64,
    stopwords: &Stopwords,
) -> Result<EmbeddingMatrix, TopicError> {
    if dim < 8 {
        return Err(TopicError::Parameter(format!("embedding dimension {dim} < 8")));
    }
    let tokens: Vec<Vec<String>> = texts.iter().map(|t| content_tokens(t.as_ref(), stopwords)).collect();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in &tokens {
        let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = texts.len() as f64;
    let mut rows = Vec::with_capacity(tokens.len());
    let mut empty = Vec::with_capacity(tokens.len());
    for doc in &tokens {
        let mut row = vec![0.0; dim];
        for t in doc {
            let idf = ((1.0 + n) / (1.0 + df[t.as_str()] as f64)).ln() + 1.0;
            row[(fnv1a(seed, t) % dim as u64) as usize] += idf;
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        empty.push(norm == 0.0);
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
        rows.push(row);
    }
    let mut m = EmbeddingMatrix::from_rows(doc_ids.to_vec(), rows)?;
    m.empty = empty;
    m.normalized = true;
    Ok(m)
}

/// Projects rows onto the top `p` principal axes, then re-normalizes.
/// Component signs are fixed so each axis's largest loading is positive.
pub fn pca_reduce(m: &EmbeddingMatrix, p: usize) -> Result<EmbeddingMatrix, TopicError> {
    if p == 0 || p > m.dim {
        return Err(TopicError::Parameter(format!("PCA dimension {p} not in 1..={}", m.dim)));
    }
    let active = m.active_rows();
    let d = m.dim;
    let mut mean = vec![0.0; d];
    for &i in &active {
        for (acc, v) in mean.iter_mut().zip(m.row(i)) {
            *acc += v;
        }
    }
    let cnt = active.len().max(1) as f64;
    mean.iter_mut().for_each(|v| *v /= cnt);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for &i in &active {
        let c: Vec<f64> = m.row(i).iter().zip(&mean).map(|(v, mu)| v - mu).collect();
        for a in 0..d {
            for b in a..d {
                cov[(a, b)] += c[a] * c[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let axes: Vec<Vec<f64>> = order[..p]
        .iter()
        .map(|&k| {
            let col: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let big = col.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
            if big < 0.0 {
                col.iter().map(|v| -v).collect()
            } else {
                col
            }
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..m.len())
        .map(|i| {
            if m.empty[i] {
                return vec![0.0; p];
            }
            let c: Vec<f64> = m.row(i).iter().zip(&mean).map(|(v, mu)| v - mu).collect();
            let mut r: Vec<f64> = axes.iter().map(|ax| ax.iter().zip(&c).map(|(a, b)| a * b).sum()).collect();
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                r.iter_mut().for_each(|v| *v /= norm);
            }
            r
        })
        .collect();
    let mut out = EmbeddingMatrix::from_rows(m.doc_ids.clone(), rows)?;
    out.empty = m.empty.clone();
    out.normalized = true;
    Ok(out)
}

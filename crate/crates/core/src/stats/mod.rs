//! Rank-based hypothesis tests, effect sizes and false discovery rate control.
//!
//! All tests rank the pooled sample with midranks and apply the usual tie
//! corrections. Inputs must be finite; an empty sample is an error.

pub mod describe;
mod fdr;
mod kruskal;
mod paired;
mod rank;
mod two_sample;

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

pub use fdr::bh_fdr;
pub use kruskal::{chi2_sf, dunn_posthoc, eta_squared, kruskal_wallis, PairwiseMatrix};
pub use paired::{wilcoxon_differences, wilcoxon_signed_rank, PMethod, WilcoxonOptions, ZeroMethod, EXACT_MAX_N};
pub use rank::{midranks, TieSummary};
pub use two_sample::{cliffs_delta, kolmogorov_q, ks_statistic, ks_two_sample, mann_whitney_u};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty sample: {0}")]
    Empty(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("need at least {need} groups, got {got}")]
    TooFewGroups { need: usize, got: usize },
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("p-value {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("{0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "mann-whitney-u")]
    MannWhitneyU,
    #[serde(rename = "kolmogorov-smirnov")]
    KolmogorovSmirnov,
    #[serde(rename = "wilcoxon-signed-rank")]
    WilcoxonSignedRank,
    #[serde(rename = "kruskal-wallis")]
    KruskalWallis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    /// Cliff's δ for Mann-Whitney, η² for Kruskal-Wallis.
    pub effect_size: Option<f64>,
    pub n: Vec<usize>,
    pub ties: TieSummary,
    pub degenerate: bool,
    /// Named auxiliary quantities (z, T⁺, T⁻, df, ...).
    pub components: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Flat serialization form of a [`TestResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRecord {
    pub method: Method,
    pub statistic: f64,
    pub p: f64,
    pub effect: Option<f64>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub k: usize,
    #[serde(rename = "N")]
    pub total_n: usize,
    pub notes: Vec<String>,
    pub components: BTreeMap<String, f64>,
    pub ties: TieSummary,
}

impl TestResult {
    pub(crate) fn new(method: Method, statistic: f64, n: Vec<usize>, ties: TieSummary) -> Self {
        TestResult {
            method,
            statistic,
            p_value: 1.0,
            effect_size: None,
            n,
            ties,
            degenerate: false,
            components: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn total_n(&self) -> usize {
        self.n.iter().sum()
    }

    pub fn record(&self) -> TestRecord {
        let mut notes = self.notes.clone();
        if self.degenerate && !notes.iter().any(|n| n.starts_with("degenerate")) {
            notes.push("degenerate".into());
        }
        TestRecord {
            method: self.method,
            statistic: self.statistic,
            p: self.p_value,
            effect: self.effect_size,
            n1: self.n.first().copied(),
            n2: self.n.get(1).copied(),
            k: self.n.len(),
            total_n: self.total_n(),
            notes,
            components: self.components.clone(),
            ties: self.ties,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.record()).expect("test records serialize")
    }
}

pub(crate) fn require_sample(x: &[f64], what: &'static str) -> Result<(), StatsError> {
    if x.is_empty() {
        return Err(StatsError::Empty(what));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(what));
    }
    Ok(())
}

/// Two-sided standard normal tail probability of |z|.
pub(crate) fn normal_two_sided(z: f64) -> f64 {
    (2.0 * Normal::standard().sf(z.abs())).min(1.0)
}

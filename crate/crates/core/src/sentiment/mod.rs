//! Lexicon- and rule-based sentiment scoring.
//!
//! Each token's valence is looked up in a [`Lexicon`] and adjusted by
//! negation, booster/dampener, capitalization, "but" and punctuation rules.
//! The adjusted sum `s` is squashed into the compound score
//! `s / sqrt(s² + 15)`, which always lies in `[-1, 1]`.

mod engine;
mod lexicon;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::{normalize_score, polarity_scores};
pub use lexicon::{Lexicon, LexiconEntry, B_DECR, B_INCR, C_INCR, N_SCALAR};

/// Compound score at or beyond which a document counts as positive (negative when mirrored).
pub const POLARITY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("compound score {0} outside [-1, 1]")]
    OutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Neutral,
    Negative,
}

impl Polarity {
    fn from_compound(c: f64) -> Self {
        Self::at(c, POLARITY_THRESHOLD)
    }

    fn at(c: f64, t: f64) -> Self {
        if c >= t {
            Polarity::Positive
        } else if c <= -t {
            Polarity::Negative
        } else {
            Polarity::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
    pub polarity: Polarity,
}

/// Maps a compound score to a polarity; both ±0.05 boundaries are inclusive.
pub fn classify(compound: f64) -> Result<Polarity, SentimentError> {
    if !(-1.0..=1.0).contains(&compound) {
        return Err(SentimentError::OutOfRange(compound));
    }
    Ok(Polarity::from_compound(compound))
}

/// [`classify`] with a caller-chosen symmetric threshold.
pub fn classify_at(compound: f64, threshold: f64) -> Result<Polarity, SentimentError> {
    if !(-1.0..=1.0).contains(&compound) {
        return Err(SentimentError::OutOfRange(compound));
    }
    Ok(Polarity::at(compound, threshold))
}

impl Lexicon {
    pub fn polarity_scores(&self, text: &str) -> SentimentScore {
        polarity_scores(text, self)
    }

    /// Scores documents in parallel; output order follows input order.
    pub fn score_all<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<SentimentScore> {
        texts.par_iter().map(|t| polarity_scores(t.as_ref(), self)).collect()
    }
}

/// Mean compound over a thread's comments; `None` when there are none.
pub fn mean_comment_sentiment(compounds: &[f64]) -> Option<f64> {
    if compounds.is_empty() {
        None
    } else {
        Some(compounds.iter().sum::<f64>() / compounds.len() as f64)
    }
}

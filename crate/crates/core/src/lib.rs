//! Multi-scale analysis of perception in online discussion corpora.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus`]: JSONL ingestion of posts and comments, thread linking,
//!   geography mapping and inclusion filters.
//! - [`sentiment`]: lexicon- and rule-based sentiment scoring (compound score).
//! - [`aspects`]: keyword-driven infrastructure aspect assignment.
//! - [`topics`]: embeddings, HDBSCAN clustering and class-based TF-IDF keywords.
//! - [`stats`]: rank-based hypothesis tests, effect sizes and FDR correction.
//! - [`lmm`]: random-intercept mixed model fitted by profiled REML.
//! - [`report`]: spatial aggregation and deterministic CSV/JSON export.

pub mod aspects;
pub mod corpus;
pub mod lmm;
pub mod report;
pub mod sentiment;
pub mod stats;
pub mod text;
pub mod topics;

pub use corpus::{Comment, GeoMap, GeoUnit, Post, Region, Thread};
pub use sentiment::{Lexicon, Polarity, SentimentScore};
pub use stats::TestResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

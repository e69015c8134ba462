//! Run configuration: JSON config file merged with command-line flags.
//!
//! Precedence is flag (or environment) > config file > built-in default.
//! Relative paths in a config file resolve against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, Args};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_KEYWORDS: &[&str] = &[
    "bike", "bikes", "biking", "bicycle", "bicycles", "bicycling", "cycling", "cyclist", "cyclists",
    "cycle", "lane", "lanes", "trail", "trails",
];

fn default_keywords() -> Vec<String> {
    DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub posts: Option<PathBuf>,
    pub comments: Option<PathBuf>,
    pub geo_map: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub aspect_lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub outdir: PathBuf,
    pub keywords: Vec<String>,
    /// Subreddits admitted without the keyword filter (topic-focused communities).
    pub keyword_exempt: Vec<String>,
    pub min_posts_state: usize,
    pub min_posts_country_plot: usize,
    pub min_comments_for_pair: usize,
    pub min_cluster_size: usize,
    pub min_samples: usize,
    pub top_k: usize,
    pub embed_dim: usize,
    pub pca_dim: usize,
    pub raw_embeddings: bool,
    pub polarity_threshold: f64,
    pub bins: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            posts: None,
            comments: None,
            geo_map: None,
            lexicon: None,
            aspect_lexicon: None,
            embeddings: None,
            stopwords: None,
            reference: None,
            outdir: PathBuf::from("out"),
            keywords: default_keywords(),
            keyword_exempt: Vec::new(),
            min_posts_state: 30,
            min_posts_country_plot: 100,
            min_comments_for_pair: 1,
            min_cluster_size: 15,
            min_samples: 15,
            top_k: 10,
            embed_dim: 256,
            pca_dim: 0,
            raw_embeddings: false,
            polarity_threshold: 0.05,
            bins: 40,
            seed: 42,
        }
    }
}

/// Flags shared by every pipeline subcommand.
#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// JSON config file; flags given on the command line override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Posts JSONL [default: none]
    #[arg(long)]
    pub posts: Option<PathBuf>,
    /// Comments JSONL [default: none]
    #[arg(long)]
    pub comments: Option<PathBuf>,
    /// Subreddit geography map (JSON) [default: none]
    #[arg(long)]
    pub geo_map: Option<PathBuf>,
    /// Sentiment lexicon TSV [default: bundled]
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Aspect keyword lexicon JSON [default: bundled]
    #[arg(long)]
    pub aspect_lexicon: Option<PathBuf>,
    /// Precomputed document embeddings [default: hashed TF-IDF fallback]
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Stopword list, one term per line [default: bundled English list]
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Flat JSON of reference values to compare table outputs against [default: none]
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Output directory for all artifacts
    #[arg(long, default_value = "out")]
    pub outdir: PathBuf,
    /// Comma-separated filter keywords (whole-token match on title and body)
    #[arg(long, value_delimiter = ',', default_values_t = default_keywords())]
    pub keywords: Vec<String>,
    /// Comma-separated subreddits exempt from the keyword filter [default: none]
    #[arg(long, value_delimiter = ',')]
    pub keyword_exempt: Vec<String>,
    /// Minimum posts for a US state to enter group comparisons
    #[arg(long, default_value_t = 30)]
    pub min_posts_state: usize,
    /// Minimum posts for a European country to enter group comparisons and plots
    #[arg(long, default_value_t = 100)]
    pub min_posts_country_plot: usize,
    /// Minimum comments for a post to enter the paired post/comment analysis
    #[arg(long, default_value_t = 1)]
    pub min_comments_for_pair: usize,
    /// HDBSCAN minimum cluster size
    #[arg(long, default_value_t = 15)]
    pub min_cluster_size: usize,
    /// HDBSCAN min_samples (core-distance neighbour count)
    #[arg(long, default_value_t = 15)]
    pub min_samples: usize,
    /// Keywords reported per topic
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Dimension of the fallback hashed embedding
    #[arg(long, default_value_t = 256)]
    pub embed_dim: usize,
    /// Reduce embeddings to this many principal components (0 keeps all)
    #[arg(long, default_value_t = 0)]
    pub pca_dim: usize,
    /// Use supplied embeddings as-is instead of L2-normalizing them
    #[arg(long, default_value_t = false)]
    pub raw_embeddings: bool,
    /// Compound score at or beyond which a document is positive (mirrored for negative)
    #[arg(long, default_value_t = 0.05)]
    pub polarity_threshold: f64,
    /// Histogram bins over [-1, 1]
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Seed for every randomized step
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (0 = all cores)
    #[arg(long, env = "CORPUS_LENS_THREADS", default_value_t = 0)]
    pub threads: usize,
}

fn explicit(m: &ArgMatches, id: &str) -> bool {
    matches!(m.value_source(id), Some(ValueSource::CommandLine | ValueSource::EnvVariable))
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

pub fn load_file(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [
        &mut cfg.posts,
        &mut cfg.comments,
        &mut cfg.geo_map,
        &mut cfg.lexicon,
        &mut cfg.aspect_lexicon,
        &mut cfg.embeddings,
        &mut cfg.stopwords,
        &mut cfg.reference,
    ] {
        *p = p.take().map(|v| resolve(base, v));
    }
    // outdir is skipped on serialization but still read from the file
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
    if raw.get("outdir").is_some() {
        cfg.outdir = resolve(base, cfg.outdir);
    }
    Ok(cfg)
}

impl Opts {
    /// Builds the effective config; `m` must be the matches this `Opts` came from.
    pub fn resolve(&self, m: &ArgMatches) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => {$(
                if explicit(m, stringify!($f)) {
                    cfg.$f = self.$f.clone().into();
                }
            )*};
        }
        take!(
            posts, comments, geo_map, lexicon, aspect_lexicon, embeddings, stopwords, reference, outdir,
            keywords, keyword_exempt, min_posts_state, min_posts_country_plot, min_comments_for_pair,
            min_cluster_size, min_samples, top_k, embed_dim, pca_dim, raw_embeddings, polarity_threshold,
            bins, seed
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, p) in self.paths() {
            if !p.is_file() {
                return bad(format!("{name} file {} does not exist", p.display()));
            }
        }
        for (name, v) in [
            ("min_posts_state", self.min_posts_state),
            ("min_posts_country_plot", self.min_posts_country_plot),
            ("min_comments_for_pair", self.min_comments_for_pair),
            ("min_samples", self.min_samples),
            ("top_k", self.top_k),
            ("bins", self.bins),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.min_cluster_size < 2 {
            return bad("min_cluster_size must be at least 2".into());
        }
        if self.embed_dim < 8 {
            return bad("embed_dim must be at least 8".into());
        }
        if !(0.0..1.0).contains(&self.polarity_threshold) {
            return bad(format!("polarity_threshold {} outside [0, 1)", self.polarity_threshold));
        }
        if self.keywords.iter().all(|k| k.trim().is_empty()) {
            return bad("keyword list must not be empty".into());
        }
        Ok(())
    }

    /// Every configured input file, by config key.
    pub fn paths(&self) -> Vec<(&'static str, &Path)> {
        [
            ("posts", &self.posts),
            ("comments", &self.comments),
            ("geo_map", &self.geo_map),
            ("lexicon", &self.lexicon),
            ("aspect_lexicon", &self.aspect_lexicon),
            ("embeddings", &self.embeddings),
            ("stopwords", &self.stopwords),
            ("reference", &self.reference),
        ]
        .into_iter()
        .filter_map(|(k, p)| p.as_deref().map(|p| (k, p)))
        .collect()
    }

    /// Group-size threshold for units of a region.
    pub fn unit_threshold(&self, region: corpus_lens::Region) -> usize {
        match region {
            corpus_lens::Region::Us => self.min_posts_state,
            corpus_lens::Region::Eu => self.min_posts_country_plot,
        }
    }
}

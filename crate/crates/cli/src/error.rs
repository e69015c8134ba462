use std::path::PathBuf;

use corpus_lens::aspects::AspectError;
use corpus_lens::corpus::CorpusError;
use corpus_lens::lmm::LmmError;
use corpus_lens::report::ReportError;
use corpus_lens::sentiment::SentimentError;
use corpus_lens::stats::StatsError;
use corpus_lens::topics::TopicError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("missing artifact {artifact} in {}; run `corpus-lens {stage}` first", outdir.display())]
    MissingArtifact {
        artifact: String,
        outdir: PathBuf,
        stage: &'static str,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::MissingArtifact { .. } => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::EmptyKeywords | CorpusError::InvalidThreshold => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            // an unwritable outdir is a setup problem, not bad data
            ReportError::Io { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::NonFinite(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<LmmError> for CliError {
    fn from(e: LmmError) -> Self {
        match e {
            LmmError::NonFinite(_) | LmmError::InvalidVariance(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<TopicError> for CliError {
    fn from(e: TopicError) -> Self {
        match e {
            TopicError::NonFinite(_) => CliError::Numeric(e.to_string()),
            TopicError::Parameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SentimentError> for CliError {
    fn from(e: SentimentError) -> Self {
        match e {
            SentimentError::Lexicon { .. } => CliError::Data(e.to_string()),
            SentimentError::OutOfRange(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AspectError> for CliError {
    fn from(e: AspectError) -> Self {
        CliError::Data(e.to_string())
    }
}

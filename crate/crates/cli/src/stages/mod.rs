//! Pipeline stages. Each reads the artifacts of earlier stages from the output
//! directory and returns the relative paths it wrote.

pub mod aspects;
pub mod ingest;
pub mod lmm;
pub mod report;
pub mod sentiment;
pub mod stats;
pub mod topics;

use corpus_lens::aspects::AspectLexicon;
use corpus_lens::text::Stopwords;
use corpus_lens::Lexicon;

use crate::artifacts::Outdir;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Sentiment,
    Aspects,
    Topics,
    Stats,
    Lmm,
    Report,
}

impl Stage {
    /// Topological order of the stage DAG.
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Sentiment,
        Stage::Aspects,
        Stage::Topics,
        Stage::Stats,
        Stage::Lmm,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Sentiment => "sentiment",
            Stage::Aspects => "aspects",
            Stage::Topics => "topics",
            Stage::Stats => "stats",
            Stage::Lmm => "lmm",
            Stage::Report => "report",
        }
    }
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: Outdir,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Self {
        let out = Outdir::new(&cfg.outdir);
        Ctx { cfg, out }
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        match &self.cfg.lexicon {
            Some(p) => Ok(Lexicon::load(p)?),
            None => Ok(Lexicon::reference()),
        }
    }

    pub fn aspect_lexicon(&self) -> Result<AspectLexicon> {
        match &self.cfg.aspect_lexicon {
            Some(p) => Ok(AspectLexicon::load(p)?),
            None => Ok(AspectLexicon::default()),
        }
    }

    pub fn stopwords(&self) -> Result<Stopwords> {
        match &self.cfg.stopwords {
            Some(p) => Stopwords::load(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
            None => Ok(Stopwords::default()),
        }
    }

    pub fn run(&self, stage: Stage) -> Result<()> {
        let written = match stage {
            Stage::Ingest => ingest::run(self)?,
            Stage::Sentiment => sentiment::run(self)?,
            Stage::Aspects => aspects::run(self)?,
            Stage::Topics => topics::run(self)?,
            Stage::Stats => stats::run(self)?,
            Stage::Lmm => lmm::run(self)?,
            Stage::Report => report::run(self)?,
        };
        manifest::record_stage(&self.out, &self.cfg, stage.name(), &written)
    }
}

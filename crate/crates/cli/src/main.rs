mod artifacts;
mod config;
mod error;
mod fixture;
mod manifest;
mod stages;

use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};

use config::Opts;
use error::{CliError, Result};
use stages::{Ctx, Stage};

/// Sentiment, topic, aspect and spatial analysis of discussion corpora.
///
/// Each subcommand reads the artifacts of earlier stages from --outdir, so
/// stages can be rerun individually; `all` runs the whole pipeline.
#[derive(Debug, Parser)]
#[command(name = "corpus-lens", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Load posts and comments, attach geography and apply the keyword filter
    Ingest(Opts),
    /// Score posts and comments (needs: ingest)
    Sentiment(Opts),
    /// Assign infrastructure aspects and summarize their sentiment (needs: ingest, sentiment)
    Aspects(Opts),
    /// Cluster posts into topics per region (needs: ingest, sentiment)
    Topics(Opts),
    /// Region, paired and group comparison tests (needs: sentiment)
    Stats(Opts),
    /// City random-intercept models per region (needs: sentiment)
    Lmm(Opts),
    /// Summary tables, distributions and table-shaped outputs (needs: every other stage)
    Report(Opts),
    /// Run every stage in dependency order
    All(Opts),
    /// Write a small synthetic corpus with planted structure
    #[command(hide = true)]
    GenFixture(fixture::FixtureArgs),
}

fn set_threads(n: usize) -> Result<()> {
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run_stages(opts: &Opts, m: &ArgMatches, stages: &[Stage]) -> Result<()> {
    let cfg = opts.resolve(m)?;
    set_threads(opts.threads)?;
    let ctx = Ctx::new(cfg);
    for &s in stages {
        ctx.run(s)?;
    }
    Ok(())
}

fn dispatch(cmd: &Cmd, m: &ArgMatches) -> Result<()> {
    let one = |opts: &Opts, s: Stage| run_stages(opts, m, &[s]);
    match cmd {
        Cmd::Ingest(o) => one(o, Stage::Ingest),
        Cmd::Sentiment(o) => one(o, Stage::Sentiment),
        Cmd::Aspects(o) => one(o, Stage::Aspects),
        Cmd::Topics(o) => one(o, Stage::Topics),
        Cmd::Stats(o) => one(o, Stage::Stats),
        Cmd::Lmm(o) => one(o, Stage::Lmm),
        Cmd::Report(o) => one(o, Stage::Report),
        Cmd::All(o) => run_stages(o, m, &Stage::ALL),
        Cmd::GenFixture(a) => fixture::write(a),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let (_, sub) = matches.subcommand().expect("a subcommand is required");
    match dispatch(&cli.cmd, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use config::RunConfig;

    fn parse(args: &[&str]) -> RunConfig {
        let m = Cli::command().try_get_matches_from(args).unwrap();
        let cli = Cli::from_arg_matches(&m).unwrap();
        match &cli.cmd {
            Cmd::All(o) | Cmd::Stats(o) => {
                let mut c = RunConfig::default();
                // resolve() validates paths, which these tests do not create
                macro_rules! copy {
                    ($($f:ident),*) => {$( c.$f = o.$f.clone().into(); )*};
                }
                copy!(
                    posts, comments, geo_map, lexicon, aspect_lexicon, embeddings, stopwords, reference, outdir,
                    keywords, keyword_exempt, min_posts_state, min_posts_country_plot, min_comments_for_pair,
                    min_cluster_size, min_samples, top_k, embed_dim, pca_dim, raw_embeddings, polarity_threshold,
                    bins, seed
                );
                c
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn flag_defaults_equal_config_defaults() {
        assert_eq!(parse(&["corpus-lens", "all"]), RunConfig::default());
    }

    #[test]
    fn flags_parse() {
        let c = parse(&["corpus-lens", "stats", "--min-posts-state", "5", "--keywords", "bike,trail"]);
        assert_eq!(c.min_posts_state, 5);
        assert_eq!(c.keywords, ["bike", "trail"]);
    }

    #[test]
    fn help_lists_defaults() {
        let mut cmd = Cli::command();
        let help = cmd.find_subcommand_mut("all").unwrap().render_long_help().to_string();
        for needle in [
            "[default: 30]",
            "[default: 100]",
            "[default: 15]",
            "[default: 10]",
            "[default: 40]",
            "[default: 0.05]",
            "[default: out]",
            "CORPUS_LENS_THREADS",
        ] {
            assert!(help.contains(needle), "{needle} missing from help");
        }
    }

    #[test]
    fn explicit_flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("c.json");
        std::fs::write(&cfg_path, r#"{"min_posts_state": 12, "bins": 8, "outdir": "o"}"#).unwrap();
        let args = ["corpus-lens", "all", "--config", cfg_path.to_str().unwrap(), "--bins", "20"];
        let m = Cli::command().try_get_matches_from(args).unwrap();
        let cli = Cli::from_arg_matches(&m).unwrap();
        let Cmd::All(o) = &cli.cmd else { unreachable!() };
        let c = o.resolve(m.subcommand().unwrap().1).unwrap();
        assert_eq!(c.min_posts_state, 12);
        assert_eq!(c.bins, 20);
        assert_eq!(c.seed, RunConfig::default().seed);
        assert_eq!(c.outdir, dir.path().join("o"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"min_post_state": 12}"#).unwrap();
        assert!(matches!(config::load_file(&p), Err(CliError::Config(_))));
    }
}

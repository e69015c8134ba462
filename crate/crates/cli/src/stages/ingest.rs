use std::collections::{BTreeMap, BTreeSet, HashSet};

use corpus_lens::corpus::{keyword_filter, link_threads, load_comments, load_posts, Loaded};
use corpus_lens::{GeoMap, Post};
use serde::Serialize;

use super::Ctx;
use crate::artifacts::{CommentDoc, ThreadDoc, CORPUS, INGEST_SUMMARY, REJECTS};
use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
struct FileCounts {
    total_lines: usize,
    valid_lines: usize,
    rejects: usize,
    duplicates: usize,
    unique: usize,
}

impl FileCounts {
    fn of<T>(l: &Loaded<T>) -> Self {
        FileCounts {
            total_lines: l.total_lines,
            valid_lines: l.valid_lines(),
            rejects: l.rejects.len(),
            duplicates: l.duplicates,
            unique: l.records.len(),
        }
    }
}

#[derive(Debug, Default, Serialize)]
struct RegionCounts {
    posts: usize,
    comments: usize,
    posts_with_comments: usize,
}

#[derive(Debug, Serialize)]
struct IngestSummary {
    posts: FileCounts,
    comments: FileCounts,
    unmapped_posts: usize,
    unmapped_subreddits: BTreeMap<String, usize>,
    keyword_exempt_posts: usize,
    keyword_dropped_posts: usize,
    retained_posts: usize,
    retained_comments: usize,
    comments_on_excluded_posts: usize,
    orphan_comments: usize,
    by_region: BTreeMap<String, RegionCounts>,
}

pub fn run(ctx: &Ctx) -> Result<Vec<String>> {
    let cfg = &ctx.cfg;
    let need = |p: &Option<std::path::PathBuf>, name: &str| {
        p.clone()
            .ok_or_else(|| CliError::Config(format!("ingest needs --{name}")))
    };
    let posts = load_posts(&need(&cfg.posts, "posts")?)?;
    let comments = load_comments(&need(&cfg.comments, "comments")?)?;
    let geo = GeoMap::load(&need(&cfg.geo_map, "geo-map")?)?;

    let exempt: BTreeSet<String> = cfg.keyword_exempt.iter().map(|s| s.to_lowercase()).collect();
    let mut unmapped: BTreeMap<String, usize> = BTreeMap::new();
    let mut filtered: Vec<Post> = Vec::new();
    let mut kept: HashSet<String> = HashSet::new();
    let mut n_exempt = 0;
    for p in &posts.records {
        if geo.lookup(&p.subreddit).is_none() {
            *unmapped.entry(p.subreddit.clone()).or_default() += 1;
        } else if exempt.contains(&p.subreddit.to_lowercase()) {
            n_exempt += 1;
            kept.insert(p.id.clone());
        } else {
            filtered.push(p.clone());
        }
    }
    let n_filtered = filtered.len();
    let passed = keyword_filter(&filtered, &cfg.keywords)?;
    let n_dropped = n_filtered - passed.len();
    kept.extend(passed.into_iter().map(|p| p.id));

    let linked = link_threads(&posts.records, &comments.records);
    let mut docs = Vec::new();
    let mut on_excluded = 0;
    let mut by_region: BTreeMap<String, RegionCounts> = BTreeMap::new();
    for t in linked.threads {
        if !kept.contains(&t.post.id) {
            on_excluded += t.comments.len();
            continue;
        }
        let g = geo.lookup(&t.post.subreddit).expect("kept posts are mapped");
        let rc = by_region.entry(g.region.to_string()).or_default();
        rc.posts += 1;
        rc.comments += t.comments.len();
        rc.posts_with_comments += usize::from(!t.comments.is_empty());
        docs.push(ThreadDoc {
            id: t.post.id.clone(),
            subreddit: t.post.subreddit.clone(),
            region: g.region,
            unit: g.unit.clone(),
            city: g.city.clone(),
            text: t.post.analysis_text(),
            comments: t
                .comments
                .iter()
                .map(|c| CommentDoc { id: c.comment_id.clone(), text: c.analysis_text().to_string() })
                .collect(),
        });
    }
    let retained_comments: usize = docs.iter().map(|d| d.comments.len()).sum();

    let summary = IngestSummary {
        posts: FileCounts::of(&posts),
        comments: FileCounts::of(&comments),
        unmapped_posts: unmapped.values().sum(),
        unmapped_subreddits: unmapped,
        keyword_exempt_posts: n_exempt,
        keyword_dropped_posts: n_dropped,
        retained_posts: docs.len(),
        retained_comments,
        comments_on_excluded_posts: on_excluded,
        orphan_comments: linked.orphans.len(),
        by_region,
    };
    debug_assert_eq!(
        summary.unmapped_posts + n_dropped + docs.len(),
        posts.records.len()
    );
    if docs.is_empty() {
        return Err(CliError::Data("no posts survive geography mapping and keyword filtering".into()));
    }

    let rejects: Vec<_> = posts.rejects.iter().chain(&comments.rejects).cloned().collect();
    ctx.out.write_jsonl(CORPUS, &docs)?;
    ctx.out.write_jsonl(REJECTS, &rejects)?;
    ctx.out.write_json(INGEST_SUMMARY, &summary)?;
    eprintln!(
        "ingest: {} posts, {} comments retained ({} rejects)",
        docs.len(),
        retained_comments,
        rejects.len()
    );
    Ok(vec![CORPUS.into(), REJECTS.into(), INGEST_SUMMARY.into()])
}

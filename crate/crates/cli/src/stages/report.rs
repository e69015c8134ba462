//! Summary tables, word frequencies, distribution data and table-shaped outputs.

use std::collections::{BTreeMap, HashMap};
use std::fs;

use corpus_lens::aspects::{aspect_summary, AspectAssignment};
use corpus_lens::report::{
    distribution_data, sentiment_summary_at, summary_table, word_frequencies, word_frequency_table, Cell,
    DistributionData, Kind, SummaryRow, Table,
};
use corpus_lens::Region;
use serde::Serialize;

use super::lmm::{lmm_path, LmmSummary};
use super::stats::{
    dunn_path, kruskal_path, region_tests_path, wilcoxon_regions_path, wilcoxon_units_path, Kruskal, Outcome,
    Paired, RegionComparison,
};
use super::topics::{RegionOutcome, TopicsFile};
use super::Ctx;
use crate::artifacts::{
    CommentScore, PostScore, ThreadDoc, ASPECT_ASSIGNMENTS, COMMENT_SCORES, CORPUS, POST_SCORES, TOPICS,
};
use crate::error::{CliError, Result};

pub const SUMMARY: &str = "sentiment_summary.csv";
pub const OBSERVED: &str = "tables/observed.json";
pub const COMPARISON: &str = "tables/reference_comparison.csv";

type Groups = BTreeMap<String, Vec<f64>>;

fn push(groups: &mut Groups, key: String, v: f64) {
    groups.entry(key).or_default().push(v);
}

#[derive(Serialize)]
struct RegionDistributions {
    posts: DistributionData,
    comments: Option<DistributionData>,
    comment_means: Option<DistributionData>,
    /// Post distributions of units meeting the region's size threshold.
    units: BTreeMap<String, DistributionData>,
}

struct Report<'a> {
    ctx: &'a Ctx,
    written: Vec<String>,
    observed: BTreeMap<String, f64>,
}

impl Report<'_> {
    fn table(&mut self, rel: &str, t: &Table) -> Result<()> {
        self.ctx.out.write(rel, t.to_csv().as_bytes())?;
        self.written.push(rel.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, v: &T) -> Result<()> {
        self.ctx.out.write_json(rel, v)?;
        self.written.push(rel.to_string());
        Ok(())
    }

    fn obs(&mut self, key: impl Into<String>, v: f64) {
        self.observed.insert(key.into(), v);
    }
}

fn summaries(posts: &[PostScore], comments: &[CommentScore], threshold: f64) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    let levels: [(&str, fn(Region, &str, Option<&str>) -> Option<String>); 3] = [
        ("region", |r, _, _| Some(r.to_string())),
        ("unit", |r, u, _| Some(format!("{r}/{u}"))),
        ("city", |r, u, c| c.map(|c| format!("{r}/{u}/{c}"))),
    ];
    for (level, key) in levels {
        let mut pg = Groups::new();
        for p in posts {
            if let Some(k) = key(p.region, &p.unit, p.city.as_deref()) {
                push(&mut pg, k, p.compound);
            }
        }
        let mut cg = Groups::new();
        for c in comments {
            if let Some(k) = key(c.region, &c.unit, c.city.as_deref()) {
                push(&mut cg, k, c.compound);
            }
        }
        rows.extend(sentiment_summary_at(level, Kind::Posts, &pg, threshold)?);
        rows.extend(sentiment_summary_at(level, Kind::Comments, &cg, threshold)?);
    }
    Ok(rows)
}

fn dist(values: &[f64], bins: usize) -> Result<Option<DistributionData>> {
    if values.is_empty() {
        Ok(None)
    } else {
        Ok(Some(distribution_data(values, bins)?))
    }
}

fn fmt_terms(terms: &[corpus_lens::topics::TermWeight]) -> String {
    terms.iter().map(|t| t.term.as_str()).collect::<Vec<_>>().join(" ")
}

pub fn run(ctx: &Ctx) -> Result<Vec<String>> {
    let docs: Vec<ThreadDoc> = ctx.out.read_jsonl(CORPUS, "ingest")?;
    let posts: Vec<PostScore> = ctx.out.read_jsonl(POST_SCORES, "sentiment")?;
    let comments: Vec<CommentScore> = ctx.out.read_jsonl(COMMENT_SCORES, "sentiment")?;
    let assignments: Vec<AspectAssignment> = ctx.out.read_jsonl(ASPECT_ASSIGNMENTS, "aspects")?;
    let topics: TopicsFile = ctx.out.read_json(TOPICS, "topics")?;
    let regions: Vec<Region> = {
        let mut r: Vec<Region> = posts.iter().map(|p| p.region).collect();
        r.sort();
        r.dedup();
        r
    };
    // load every upstream artifact before writing anything
    let region_tests: Vec<(&str, Outcome<RegionComparison>)> = ["mann_whitney", "ks"]
        .into_iter()
        .map(|k| Ok((k, ctx.out.read_json(&region_tests_path(k), "stats")?)))
        .collect::<Result<_>>()?;
    let paired: BTreeMap<String, Outcome<Paired>> = ctx.out.read_json(&wilcoxon_regions_path(), "stats")?;
    let mut units_paired = BTreeMap::new();
    let mut kw = BTreeMap::new();
    let mut lmm = BTreeMap::new();
    for &r in &regions {
        let u: Vec<Outcome<Paired>> = ctx.out.read_json(&wilcoxon_units_path(r), "stats")?;
        units_paired.insert(r, u);
        let k: BTreeMap<String, Outcome<Kruskal>> = ctx.out.read_json(&kruskal_path(r), "stats")?;
        kw.insert(r, k);
        let l: BTreeMap<String, Outcome<LmmSummary>> = ctx.out.read_json(&lmm_path(r), "lmm")?;
        lmm.insert(r, l);
    }

    let mut rep = Report { ctx, written: Vec::new(), observed: BTreeMap::new() };
    let stopwords = ctx.stopwords()?;

    // aggregate sentiment at region, unit and city level
    let rows = summaries(&posts, &comments, ctx.cfg.polarity_threshold)?;
    rep.table(SUMMARY, &summary_table(&rows))?;
    let mut t = Table::new(["region", "kind", "n", "mean", "std", "pct_positive", "pct_negative"]);
    for r in rows.iter().filter(|r| r.level == "region") {
        t.push(vec![
            r.scope.as_str().into(),
            r.kind.as_str().into(),
            r.n.into(),
            r.mean.into(),
            r.std.into(),
            r.pct_positive.into(),
            r.pct_negative.into(),
        ]);
        let k = format!("sentiment.{}.{}", r.scope, r.kind.as_str());
        rep.obs(format!("{k}.n"), r.n as f64);
        rep.obs(format!("{k}.mean"), r.mean);
        rep.obs(format!("{k}.std"), r.std);
        rep.obs(format!("{k}.pct_positive"), r.pct_positive);
        rep.obs(format!("{k}.pct_negative"), r.pct_negative);
    }
    rep.table("tables/sentiment_regions.csv", &t)?;

    for &region in &regions {
        let texts: Vec<&str> = docs.iter().filter(|d| d.region == region).map(|d| d.text.as_str()).collect();
        let freqs = word_frequencies(&texts, &stopwords);
        rep.table(&format!("wordfreq_{region}.csv"), &word_frequency_table(&freqs))?;

        let rp: Vec<&PostScore> = posts.iter().filter(|p| p.region == region).collect();
        let pv: Vec<f64> = rp.iter().map(|p| p.compound).collect();
        let cv: Vec<f64> = comments.iter().filter(|c| c.region == region).map(|c| c.compound).collect();
        let mv: Vec<f64> = rp
            .iter()
            .filter(|p| p.n_comments >= ctx.cfg.min_comments_for_pair)
            .filter_map(|p| p.comment_mean)
            .collect();
        let mut by_unit = Groups::new();
        for p in &rp {
            push(&mut by_unit, p.unit.clone(), p.compound);
        }
        let threshold = ctx.cfg.unit_threshold(region);
        let mut units = BTreeMap::new();
        for (u, v) in by_unit.iter().filter(|(_, v)| v.len() >= threshold) {
            units.insert(u.clone(), distribution_data(v, ctx.cfg.bins)?);
        }
        let d = RegionDistributions {
            posts: distribution_data(&pv, ctx.cfg.bins)?,
            comments: dist(&cv, ctx.cfg.bins)?,
            comment_means: dist(&mv, ctx.cfg.bins)?,
            units,
        };
        rep.json(&format!("dist_{region}.json"), &d)?;
    }

    // topics
    let mut t = Table::new(["region", "topic_id", "n", "share", "mean_sentiment", "terms"]);
    for (region, o) in &topics.regions {
        if let RegionOutcome::Fitted(rt) = o {
            rep.obs(format!("topics.{region}.n_topics"), rt.n_topics as f64);
            rep.obs(format!("topics.{region}.noise_fraction"), rt.noise_fraction);
            for tp in &rt.topics {
                t.push(vec![
                    region.as_str().into(),
                    tp.topic_id.into(),
                    tp.n.into(),
                    tp.share.into(),
                    tp.mean_sentiment.into(),
                    fmt_terms(&tp.terms).into(),
                ]);
            }
        }
    }
    rep.table("tables/topics.csv", &t)?;

    // aspects
    let sentiments: HashMap<String, f64> = posts.iter().map(|p| (p.id.clone(), p.compound)).collect();
    let post_region: HashMap<String, String> = posts.iter().map(|p| (p.id.clone(), p.region.to_string())).collect();
    let mut t = Table::new(["region", "aspect", "n", "mean", "median"]);
    for r in aspect_summary(&assignments, &sentiments, &post_region)? {
        let k = format!("aspects.{}.{}", r.region, r.aspect.name());
        rep.obs(format!("{k}.n"), r.n as f64);
        rep.obs(format!("{k}.mean"), r.mean);
        rep.obs(format!("{k}.median"), r.median);
        t.push(vec![r.region.as_str().into(), r.aspect.name().into(), r.n.into(), r.mean.into(), r.median.into()]);
    }
    rep.table("tables/aspects.csv", &t)?;

    // region comparison on posts
    let mut t = Table::new(["test", "x", "y", "n_x", "n_y", "statistic", "p", "effect"]);
    for (name, o) in &region_tests {
        if let Some(c) = o.done() {
            rep.obs(format!("{name}.posts.statistic"), c.statistic);
            rep.obs(format!("{name}.posts.p"), c.p);
            if let Some(e) = c.effect {
                rep.obs(format!("{name}.posts.effect"), e);
            }
            t.push(vec![
                (*name).into(),
                c.x.as_str().into(),
                c.y.as_str().into(),
                c.n_x.into(),
                c.n_y.into(),
                c.statistic.into(),
                Cell::PValue(c.p),
                c.effect.into(),
            ]);
        }
    }
    rep.table("tables/region_tests.csv", &t)?;

    // paired post/comment shift
    let mut t = Table::new(["region", "n_paired", "median_post", "median_comment", "W", "p"]);
    for (region, o) in &paired {
        if let Some(p) = o.done() {
            let k = format!("wilcoxon.{region}");
            rep.obs(format!("{k}.n"), p.n as f64);
            rep.obs(format!("{k}.median_post"), p.median_post);
            rep.obs(format!("{k}.median_comment"), p.median_comment);
            rep.obs(format!("{k}.W"), p.statistic);
            rep.obs(format!("{k}.p"), p.p);
            t.push(vec![
                region.as_str().into(),
                p.n.into(),
                p.median_post.into(),
                p.median_comment.into(),
                p.statistic.into(),
                Cell::PValue(p.p),
            ]);
        }
    }
    rep.table("tables/wilcoxon_regions.csv", &t)?;

    for &region in &regions {
        let mut done: Vec<&Paired> = units_paired[&region].iter().filter_map(|o| o.done()).collect();
        done.sort_by(|a, b| a.p.total_cmp(&b.p).then_with(|| a.scope.cmp(&b.scope)));
        let mut t = Table::new(["unit", "n", "median_post", "median_comment", "W", "p", "p_fdr"]);
        for p in done {
            let k = format!("wilcoxon.{region}.{}", p.scope);
            rep.obs(format!("{k}.n"), p.n as f64);
            rep.obs(format!("{k}.W"), p.statistic);
            rep.obs(format!("{k}.p"), p.p);
            t.push(vec![
                p.scope.as_str().into(),
                p.n.into(),
                p.median_post.into(),
                p.median_comment.into(),
                p.statistic.into(),
                Cell::PValue(p.p),
                p.p_fdr.map_or(Cell::Missing, Cell::PValue),
            ]);
            if let Some(q) = p.p_fdr {
                rep.obs(format!("{k}.p_fdr"), q);
            }
        }
        rep.table(&format!("tables/wilcoxon_units_{region}.csv"), &t)?;

        let mut t = Table::new(["analysis", "H", "p", "eta2", "k", "N", "min_per_unit"]);
        for (name, o) in &kw[&region] {
            if let Some(k) = o.done() {
                let key = format!("kruskal.{region}.{name}");
                rep.obs(format!("{key}.H"), k.h);
                rep.obs(format!("{key}.p"), k.p);
                rep.obs(format!("{key}.k"), k.k as f64);
                rep.obs(format!("{key}.N"), k.n as f64);
                if let Some(e) = k.eta2 {
                    rep.obs(format!("{key}.eta2"), e);
                }
                t.push(vec![
                    name.as_str().into(),
                    k.h.into(),
                    Cell::PValue(k.p),
                    k.eta2.into(),
                    k.k.into(),
                    k.n.into(),
                    k.min_per_unit.into(),
                ]);
            }
        }
        rep.table(&format!("tables/kruskal_{region}.csv"), &t)?;

        let dunn = ctx.out.path(&dunn_path(region));
        if dunn.is_file() {
            let bytes = fs::read(&dunn).map_err(|e| CliError::Data(format!("{}: {e}", dunn.display())))?;
            let rel = format!("tables/dunn_{region}.csv");
            ctx.out.write(&rel, &bytes)?;
            rep.written.push(rel);
        }

        let mut t = Table::new(["outcome", "var_city", "var_resid", "icc", "n_obs", "n_cities", "method"]);
        for (name, o) in &lmm[&region] {
            if let Some(s) = o.done() {
                let key = format!("lmm.{region}.{name}");
                rep.obs(format!("{key}.var_city"), s.var_city);
                rep.obs(format!("{key}.var_resid"), s.var_resid);
                rep.obs(format!("{key}.icc"), s.icc);
                t.push(vec![
                    name.as_str().into(),
                    s.var_city.into(),
                    s.var_resid.into(),
                    s.icc.into(),
                    s.n_obs.into(),
                    s.n_cities.into(),
                    "profiled REML".into(),
                ]);
            }
        }
        rep.table(&format!("tables/lmm_{region}.csv"), &t)?;
    }

    let observed = std::mem::take(&mut rep.observed);
    rep.json(OBSERVED, &observed)?;
    if let Some(path) = &ctx.cfg.reference {
        let t = compare(path, &observed)?;
        rep.table(COMPARISON, &t)?;
    } else {
        let _ = fs::remove_file(ctx.out.path(COMPARISON));
    }
    rep.written.sort();
    Ok(rep.written)
}

/// Reference values are reported next to observed ones; nothing is asserted.
fn compare(path: &std::path::Path, observed: &BTreeMap<String, f64>) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let reference: BTreeMap<String, f64> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("reference {} must map keys to numbers: {e}", path.display())))?;
    let mut t = Table::new(["key", "reference", "observed", "abs_diff", "rel_diff"]);
    for (k, r) in &reference {
        let row = match observed.get(k) {
            Some(&o) => {
                let d = (o - r).abs();
                let rel = if *r != 0.0 { Cell::Float(d / r.abs()) } else { Cell::Missing };
                vec![k.as_str().into(), num(*r), num(o), num(d), rel]
            }
            None => vec![k.as_str().into(), num(*r), Cell::Missing, Cell::Missing, Cell::Missing],
        };
        t.push(row);
    }
    Ok(t)
}

/// Tiny p-values would print as 0.000000 in fixed notation.
fn num(v: f64) -> Cell {
    if v != 0.0 && v.abs() < 1e-4 {
        Cell::PValue(v)
    } else {
        Cell::Float(v)
    }
}

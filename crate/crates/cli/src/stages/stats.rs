use std::collections::BTreeMap;

use corpus_lens::report::pairwise_table;
use corpus_lens::stats::{
    bh_fdr, dunn_posthoc, ks_two_sample, kruskal_wallis, mann_whitney_u, wilcoxon_signed_rank, StatsError,
    TestResult, WilcoxonOptions,
};
use corpus_lens::stats::describe::{mean, median};
use corpus_lens::Region;
use serde::{Deserialize, Serialize};

use super::Ctx;
use crate::artifacts::{PostScore, POST_SCORES, TESTS_DIR};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome<T> {
    Done(T),
    Skipped {
        skipped: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scope: Option<String>,
    },
}

impl<T> Outcome<T> {
    pub fn done(&self) -> Option<&T> {
        match self {
            Outcome::Done(t) => Some(t),
            Outcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionComparison {
    pub x: String,
    pub y: String,
    pub n_x: usize,
    pub n_y: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    pub statistic: f64,
    pub p: f64,
    pub effect: Option<f64>,
    pub test: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paired {
    pub scope: String,
    pub n: usize,
    pub median_post: f64,
    pub median_comment: f64,
    pub mean_post: f64,
    pub mean_comment: f64,
    pub statistic: f64,
    pub p: f64,
    pub p_fdr: Option<f64>,
    pub test: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kruskal {
    pub analysis: String,
    pub h: f64,
    pub p: f64,
    pub eta2: Option<f64>,
    pub k: usize,
    pub n: usize,
    pub min_per_unit: usize,
    pub units: BTreeMap<String, usize>,
    pub test: serde_json::Value,
}

pub fn region_tests_path(kind: &str) -> String {
    format!("{TESTS_DIR}/regions_{kind}.json")
}

pub fn wilcoxon_regions_path() -> String {
    format!("{TESTS_DIR}/wilcoxon_regions.json")
}

pub fn wilcoxon_units_path(r: Region) -> String {
    format!("{TESTS_DIR}/wilcoxon_units_{r}.json")
}

pub fn kruskal_path(r: Region) -> String {
    format!("{TESTS_DIR}/kruskal_{r}.json")
}

pub fn dunn_path(r: Region) -> String {
    format!("dunn_{r}.csv")
}

/// Soft failures (too few groups, empty input) become a recorded skip;
/// non-finite input aborts the stage.
fn soften<T>(r: std::result::Result<T, StatsError>) -> Result<Outcome<T>> {
    match r {
        Ok(t) => Ok(Outcome::Done(t)),
        Err(e @ StatsError::NonFinite(_)) => Err(e.into()),
        Err(e) => Ok(Outcome::Skipped { skipped: e.to_string(), scope: None }),
    }
}

fn paired(scope: &str, pairs: &[(f64, f64)]) -> Result<Outcome<Paired>> {
    let out = soften(wilcoxon_signed_rank(pairs, WilcoxonOptions::default()).map(|t: TestResult| {
        let posts: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let comments: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        Paired {
            scope: scope.to_string(),
            n: pairs.len(),
            median_post: median(&posts),
            median_comment: median(&comments),
            mean_post: mean(&posts),
            mean_comment: mean(&comments),
            statistic: t.statistic,
            p: t.p_value,
            p_fdr: None,
            test: t.to_json(),
        }
    }))?;
    Ok(match out {
        Outcome::Skipped { skipped, .. } => Outcome::Skipped { skipped, scope: Some(scope.to_string()) },
        done => done,
    })
}

fn kruskal(analysis: &str, groups: &BTreeMap<String, Vec<f64>>, threshold: usize) -> Result<Outcome<Kruskal>> {
    let kept: BTreeMap<&String, &Vec<f64>> = groups.iter().filter(|(_, v)| v.len() >= threshold).collect();
    let slices: Vec<&[f64]> = kept.values().map(|v| v.as_slice()).collect();
    soften(kruskal_wallis(&slices).map(|t| Kruskal {
        analysis: analysis.to_string(),
        h: t.statistic,
        p: t.p_value,
        eta2: t.effect_size,
        k: slices.len(),
        n: t.total_n(),
        min_per_unit: threshold,
        units: kept.iter().map(|(u, v)| ((*u).clone(), v.len())).collect(),
        test: t.to_json(),
    }))
}

fn pairs_of<'a>(posts: impl Iterator<Item = &'a PostScore>, min_comments: usize) -> Vec<(f64, f64)> {
    posts
        .filter(|p| p.n_comments >= min_comments)
        .filter_map(|p| p.comment_mean.map(|c| (p.compound, c)))
        .collect()
}

pub fn run(ctx: &Ctx) -> Result<Vec<String>> {
    let posts: Vec<PostScore> = ctx.out.read_jsonl(POST_SCORES, "sentiment")?;
    let min_c = ctx.cfg.min_comments_for_pair;
    let mut written = Vec::new();

    let mut by_region: BTreeMap<Region, Vec<&PostScore>> = BTreeMap::new();
    for p in &posts {
        by_region.entry(p.region).or_default().push(p);
    }

    // region vs region on post sentiment
    let (eu, us) = (by_region.get(&Region::Eu), by_region.get(&Region::Us));
    for kind in ["mann_whitney", "ks"] {
        let out: Outcome<RegionComparison> = match (eu, us) {
            (Some(e), Some(u)) => {
                let x: Vec<f64> = e.iter().map(|p| p.compound).collect();
                let y: Vec<f64> = u.iter().map(|p| p.compound).collect();
                let r = if kind == "ks" { ks_two_sample(&x, &y) } else { mann_whitney_u(&x, &y, true) };
                soften(r.map(|t| RegionComparison {
                    x: "EU".into(),
                    y: "US".into(),
                    n_x: x.len(),
                    n_y: y.len(),
                    mean_x: mean(&x),
                    mean_y: mean(&y),
                    statistic: t.statistic,
                    p: t.p_value,
                    effect: t.effect_size,
                    test: t.to_json(),
                }))?
            }
            _ => Outcome::Skipped { skipped: "both regions are required".into(), scope: None },
        };
        let path = region_tests_path(kind);
        ctx.out.write_json(&path, &out)?;
        written.push(path);
    }

    let mut regional: BTreeMap<String, Outcome<Paired>> = BTreeMap::new();
    for (region, rposts) in &by_region {
        let threshold = ctx.cfg.unit_threshold(*region);
        regional.insert(region.to_string(), paired(region.as_str(), &pairs_of(rposts.iter().copied(), min_c))?);

        let mut unit_posts: BTreeMap<String, Vec<&PostScore>> = BTreeMap::new();
        for p in rposts {
            unit_posts.entry(p.unit.clone()).or_default().push(p);
        }

        // per-unit paired tests, BH across the units that could be tested
        let mut units: Vec<Outcome<Paired>> = Vec::new();
        for (unit, ps) in &unit_posts {
            units.push(paired(unit, &pairs_of(ps.iter().copied(), min_c))?);
        }
        let raw: Vec<f64> = units.iter().filter_map(|u| u.done().map(|p| p.p)).collect();
        if !raw.is_empty() {
            let adj = bh_fdr(&raw)?;
            let mut it = adj.into_iter();
            for u in &mut units {
                if let Outcome::Done(p) = u {
                    p.p_fdr = it.next();
                }
            }
        }
        let path = wilcoxon_units_path(*region);
        ctx.out.write_json(&path, &units)?;
        written.push(path);

        let post_groups: BTreeMap<String, Vec<f64>> =
            unit_posts.iter().map(|(u, ps)| (u.clone(), ps.iter().map(|p| p.compound).collect())).collect();
        let comment_groups: BTreeMap<String, Vec<f64>> = unit_posts
            .iter()
            .map(|(u, ps)| {
                let v: Vec<f64> =
                    ps.iter().filter(|p| p.n_comments >= min_c).filter_map(|p| p.comment_mean).collect();
                (u.clone(), v)
            })
            .collect();
        let mut kw = BTreeMap::new();
        kw.insert("posts", kruskal("posts", &post_groups, threshold)?);
        kw.insert("comment_means", kruskal("comment_means", &comment_groups, threshold)?);
        let path = kruskal_path(*region);
        ctx.out.write_json(&path, &kw)?;
        written.push(path);

        let kept: BTreeMap<&String, &Vec<f64>> = post_groups.iter().filter(|(_, v)| v.len() >= threshold).collect();
        if kept.len() >= 3 {
            let names: Vec<String> = kept.keys().map(|s| (*s).clone()).collect();
            let slices: Vec<&[f64]> = kept.values().map(|v| v.as_slice()).collect();
            let m = dunn_posthoc(&names, &slices).map_err(CliError::from)?;
            let path = dunn_path(*region);
            ctx.out.write(&path, pairwise_table(&m).to_csv().as_bytes())?;
            written.push(path);
        } else {
            let _ = std::fs::remove_file(ctx.out.path(&dunn_path(*region)));
            eprintln!("stats: {region}: {} units meet the size threshold, no Dunn matrix", kept.len());
        }
    }
    let path = wilcoxon_regions_path();
    ctx.out.write_json(&path, &regional)?;
    written.push(path);
    written.sort();
    Ok(written)
}

use std::collections::BTreeMap;

use corpus_lens::lmm::{fit_random_intercept, Criterion, LmmError, Observation};
use corpus_lens::Region;
use serde::{Deserialize, Serialize};

use super::stats::Outcome;
use super::Ctx;
use crate::artifacts::{PostScore, POST_SCORES};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmmSummary {
    pub outcome: String,
    pub var_city: f64,
    pub var_resid: f64,
    pub icc: f64,
    pub loglik: f64,
    pub n_obs: usize,
    pub n_cities: usize,
    pub n_units: usize,
    /// Posts dropped because their subreddit maps to no city.
    pub n_without_city: usize,
    pub converged: bool,
    pub boundary: bool,
    pub fit: serde_json::Value,
}

pub fn lmm_path(r: Region) -> String {
    format!("lmm_{r}.json")
}

fn fit(outcome: &str, rows: &[(&PostScore, Option<f64>)]) -> Result<Outcome<LmmSummary>> {
    let mut obs = Vec::new();
    let mut without_city = 0;
    for (p, y) in rows {
        let Some(y) = y else { continue };
        match &p.city {
            // city names repeat across units, so the unit qualifies the key
            Some(c) => obs.push(Observation::new(*y, format!("{}/{}", p.unit, c), p.unit.clone())),
            None => without_city += 1,
        }
    }
    let n_units = obs.iter().map(|o| o.unit.as_str()).collect::<std::collections::BTreeSet<_>>().len();
    match fit_random_intercept(&obs, Criterion::Reml) {
        Ok(vc) => Ok(Outcome::Done(LmmSummary {
            outcome: outcome.to_string(),
            var_city: vc.var_city,
            var_resid: vc.var_resid,
            icc: vc.icc,
            loglik: vc.loglik,
            n_obs: vc.n_obs,
            n_cities: vc.n_cities,
            n_units,
            n_without_city: without_city,
            converged: vc.converged,
            boundary: vc.boundary,
            fit: serde_json::to_value(&vc).expect("variance components serialize"),
        })),
        Err(e @ (LmmError::TooFewCities(_) | LmmError::NoReplicatedCity | LmmError::RankDeficient(_))) => {
            Ok(Outcome::Skipped { skipped: e.to_string(), scope: Some(outcome.to_string()) })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(ctx: &Ctx) -> Result<Vec<String>> {
    let posts: Vec<PostScore> = ctx.out.read_jsonl(POST_SCORES, "sentiment")?;
    let min_c = ctx.cfg.min_comments_for_pair;
    let mut by_region: BTreeMap<Region, Vec<&PostScore>> = BTreeMap::new();
    for p in &posts {
        by_region.entry(p.region).or_default().push(p);
    }
    let mut written = Vec::new();
    for (region, rposts) in &by_region {
        let post_rows: Vec<_> = rposts.iter().map(|p| (*p, Some(p.compound))).collect();
        let comment_rows: Vec<_> = rposts
            .iter()
            .filter(|p| p.n_comments >= min_c)
            .map(|p| (*p, p.comment_mean))
            .collect();
        let mut out = BTreeMap::new();
        out.insert("posts", fit("posts", &post_rows)?);
        out.insert("comment_means", fit("comment_means", &comment_rows)?);
        for (k, o) in &out {
            match o {
                Outcome::Done(s) => eprintln!(
                    "lmm: {region} {k}: var_city {:.4}, var_resid {:.4}, icc {:.4}",
                    s.var_city, s.var_resid, s.icc
                ),
                Outcome::Skipped { skipped, .. } => eprintln!("lmm: {region} {k}: skipped ({skipped})"),
            }
        }
        let path = lmm_path(*region);
        ctx.out.write_json(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

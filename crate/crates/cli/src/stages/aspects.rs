use std::collections::HashMap;

use corpus_lens::aspects::{aspect_summary, match_aspects, AspectAssignment};
use corpus_lens::report::Table;
use rayon::prelude::*;

use super::Ctx;
use crate::artifacts::{PostScore, ThreadDoc, ASPECT_ASSIGNMENTS, ASPECT_SUMMARY, CORPUS, POST_SCORES};
use crate::error::Result;

pub fn run(ctx: &Ctx) -> Result<Vec<String>> {
    let docs: Vec<ThreadDoc> = ctx.out.read_jsonl(CORPUS, "ingest")?;
    let scores: Vec<PostScore> = ctx.out.read_jsonl(POST_SCORES, "sentiment")?;
    let lex = ctx.aspect_lexicon()?;

    let assignments: Vec<AspectAssignment> = docs.par_iter().map(|d| match_aspects(&d.id, &d.text, &lex)).collect();
    let sentiments: HashMap<String, f64> = scores.iter().map(|s| (s.id.clone(), s.compound)).collect();
    let regions: HashMap<String, String> = docs.iter().map(|d| (d.id.clone(), d.region.to_string())).collect();
    let rows = aspect_summary(&assignments, &sentiments, &regions)?;

    let mut t = Table::new(["region", "aspect", "n", "mean", "median"]);
    for r in &rows {
        t.push(vec![r.region.as_str().into(), r.aspect.name().into(), r.n.into(), r.mean.into(), r.median.into()]);
    }
    ctx.out.write_jsonl(ASPECT_ASSIGNMENTS, &assignments)?;
    ctx.out.write(ASPECT_SUMMARY, t.to_csv().as_bytes())?;
    let assigned = assignments.iter().filter(|a| !a.aspects.is_empty()).count();
    eprintln!("aspects: {assigned} of {} posts matched at least one aspect", assignments.len());
    Ok(vec![ASPECT_ASSIGNMENTS.into(), ASPECT_SUMMARY.into()])
}

use corpus_lens::sentiment::{classify_at, mean_comment_sentiment};

use super::Ctx;
use crate::artifacts::{CommentScore, PostScore, ThreadDoc, COMMENT_SCORES, CORPUS, POST_SCORES};
use crate::error::Result;

pub fn run(ctx: &Ctx) -> Result<Vec<String>> {
    let docs: Vec<ThreadDoc> = ctx.out.read_jsonl(CORPUS, "ingest")?;
    let lex = ctx.lexicon()?;
    let t = ctx.cfg.polarity_threshold;

    let post_texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    let post_scores = lex.score_all(&post_texts);
    let comment_texts: Vec<&str> = docs
        .iter()
        .flat_map(|d| d.comments.iter().map(|c| c.text.as_str()))
        .collect();
    let mut comment_iter = lex.score_all(&comment_texts).into_iter();

    let mut posts = Vec::with_capacity(docs.len());
    let mut comments = Vec::with_capacity(comment_texts.len());
    for (d, s) in docs.iter().zip(post_scores) {
        let mut compounds = Vec::with_capacity(d.comments.len());
        for c in &d.comments {
            let cs = comment_iter.next().expect("one score per comment");
            compounds.push(cs.compound);
            comments.push(CommentScore {
                id: c.id.clone(),
                post_id: d.id.clone(),
                region: d.region,
                unit: d.unit.clone(),
                city: d.city.clone(),
                compound: cs.compound,
                polarity: classify_at(cs.compound, t)?,
            });
        }
        posts.push(PostScore {
            id: d.id.clone(),
            region: d.region,
            unit: d.unit.clone(),
            city: d.city.clone(),
            compound: s.compound,
            neg: s.neg,
            neu: s.neu,
            pos: s.pos,
            polarity: classify_at(s.compound, t)?,
            n_comments: d.comments.len(),
            comment_mean: mean_comment_sentiment(&compounds),
        });
    }
    ctx.out.write_jsonl(POST_SCORES, &posts)?;
    ctx.out.write_jsonl(COMMENT_SCORES, &comments)?;
    eprintln!("sentiment: scored {} posts, {} comments", posts.len(), comments.len());
    Ok(vec![POST_SCORES.into(), COMMENT_SCORES.into()])
}

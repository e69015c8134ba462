//! Synthetic two-region corpus with planted structure.
//!
//! Posts are drawn from three themes: theft (negative wording), recreation
//! (positive) and infrastructure news (mostly neutral). Each city has its own
//! theme mix, which plants between-city variance. Replies are written to be
//! more negative than the posts they answer.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Args)]
pub struct FixtureArgs {
    /// Directory to write posts.jsonl, comments.jsonl, geo_map.json and config.json into
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Posts per region (two regions)
    #[arg(long, default_value_t = 100)]
    pub posts_per_region: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Theme {
    Theft,
    Recreation,
    Infrastructure,
}

impl Theme {
    fn name(self) -> &'static str {
        match self {
            Theme::Theft => "theft",
            Theme::Recreation => "recreation",
            Theme::Infrastructure => "infrastructure",
        }
    }

    fn titles(self) -> &'static [&'static str] {
        match self {
            Theme::Theft => &[
                "My bike was stolen from the bike rack outside work",
                "Bike stolen overnight, lock cut",
                "Another bike theft at the train station",
                "PSA: thieves cutting bike locks near campus",
                "Stolen bike, the cable lock was useless",
            ],
            Theme::Recreation => &[
                "Beautiful sunset bike ride on the river trail",
                "Amazing weekend bike ride through the hills",
                "Great group bike ride on the lakeside trail",
                "Lovely scenic trail loop on the bike this morning",
                "Best bike ride of the summer with friends",
            ],
            Theme::Infrastructure => &[
                "City council vote on the new bike lane plan",
                "Protected bike lane construction on Main Street",
                "Question about the bike lane at the intersection redesign",
                "Painted bike lane on the bridge is getting repainted",
                "Bike lane detour during the bridge works",
            ],
        }
    }

    fn bodies(self) -> &'static [&'static str] {
        match self {
            Theme::Theft => &[
                "Someone cut the lock in broad daylight and nobody did anything.",
                "I am furious and heartbroken.",
                "Police said theft reports like this are rarely solved.",
                "Third stolen bike on our street this month, terrible.",
                "I hate that thieves get away with it every time.",
                "Lost my commute and my savings, awful week.",
                "Worst feeling ever, the rack was empty.",
            ],
            Theme::Recreation => &[
                "The views were gorgeous and the weather was perfect.",
                "Had so much fun, highly recommend the loop.",
                "Fresh air, smooth gravel and happy legs.",
                "Everyone was friendly and we stopped for great coffee.",
                "Such a peaceful and relaxing afternoon.",
                "Love this trail, cannot wait to ride it again.",
            ],
            Theme::Infrastructure => &[
                "Construction starts next month according to the city.",
                "The plan adds signals at two intersections.",
                "Does anyone know the timeline for the bus stop changes?",
                "The public meeting is on Tuesday at the library.",
                "Parking will be removed on one side of the street.",
            ],
        }
    }

    fn replies(self) -> &'static [&'static str] {
        match self {
            Theme::Theft => &[
                "Sorry, that sucks.",
                "Thieves are the worst, hope you find it.",
                "Police never do anything about theft here.",
                "Use two locks, cable locks are useless.",
                "Ugh, same thing happened to me last year.",
            ],
            Theme::Recreation => &[
                "Nice, but watch out for the potholes on that stretch.",
                "Looks fun, too bad the traffic on the way there is awful.",
                "Great photos!",
                "That road is dangerous after dark though.",
                "I got a flat there last week, annoying.",
            ],
            Theme::Infrastructure => &[
                "Drivers will just park in it anyway.",
                "About time, the current road is dangerous.",
                "Another waste of money.",
                "Good news if it actually gets built.",
                "The intersection is a nightmare right now.",
            ],
        }
    }
}

struct Unit {
    region: &'static str,
    unit: &'static str,
    /// (subreddit, city); `None` marks a unit-wide community.
    subs: [(&'static str, Option<&'static str>); 3],
}

const UNITS: [Unit; 6] = [
    Unit { region: "US", unit: "Texas", subs: [("Austin", Some("Austin")), ("houston", Some("Houston")), ("texas", None)] },
    Unit { region: "US", unit: "Oregon", subs: [("Portland", Some("Portland")), ("Eugene", Some("Eugene")), ("oregon", None)] },
    Unit { region: "US", unit: "Colorado", subs: [("Denver", Some("Denver")), ("boulder", Some("Boulder")), ("Colorado", None)] },
    Unit { region: "EU", unit: "Germany", subs: [("berlin", Some("Berlin")), ("Munich", Some("Munich")), ("germany", None)] },
    Unit { region: "EU", unit: "Netherlands", subs: [("Amsterdam", Some("Amsterdam")), ("Utrecht", Some("Utrecht")), ("thenetherlands", None)] },
    Unit { region: "EU", unit: "Denmark", subs: [("copenhagen", Some("Copenhagen")), ("Aarhus", Some("Aarhus")), ("Denmark", None)] },
];

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

/// Splits `total` into `parts` near-equal counts, larger ones first.
fn split(total: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| total / parts + usize::from(i < total % parts)).collect()
}

pub fn write(args: &FixtureArgs) -> Result<()> {
    if args.posts_per_region < 30 {
        return Err(CliError::Config("posts_per_region must be at least 30".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut posts = String::new();
    let mut comments = String::new();
    let mut geo = serde_json::Map::new();
    let mut truth = BTreeMap::new();
    let mut themes = BTreeMap::new();
    let (mut pid, mut cid) = (0usize, 0usize);

    for region in ["US", "EU"] {
        let units: Vec<&Unit> = UNITS.iter().filter(|u| u.region == region).collect();
        for (u, n_unit) in units.iter().zip(split(args.posts_per_region, units.len())) {
            // cities carry most of a unit's posts; the unit-wide community the rest
            let n_city = (n_unit * 2) / 5;
            let counts = [n_city, n_city, n_unit - 2 * n_city];
            for (&(sub, city), n) in u.subs.iter().zip(counts) {
                geo.insert(sub.into(), json!({"region": region, "unit": u.unit, "city": city}));
                let p_theft: f64 = rng.random_range(0.15..0.55);
                let p_rec = (1.0 - p_theft) * 0.6;
                truth.insert(
                    format!("{region}/{}/{}", u.unit, city.unwrap_or("-")),
                    json!({"p_theft": p_theft, "p_recreation": p_rec, "posts": n}),
                );
                for _ in 0..n {
                    pid += 1;
                    let r: f64 = rng.random();
                    let theme = if r < p_theft {
                        Theme::Theft
                    } else if r < p_theft + p_rec {
                        Theme::Recreation
                    } else {
                        Theme::Infrastructure
                    };
                    let id = format!("p{pid:04}");
                    themes.insert(id.clone(), theme.name());
                    let title = pick(&mut rng, theme.titles());
                    let body = match rng.random_range(0..4) {
                        0 => String::new(),
                        _ => {
                            let a = pick(&mut rng, theme.bodies());
                            let b = pick(&mut rng, theme.bodies());
                            if a == b { a.to_string() } else { format!("{a} {b}") }
                        }
                    };
                    let created = 1_650_000_000 + 3_600 * pid as i64;
                    let n_comments = rng.random_range(0..5usize);
                    posts.push_str(&serde_json::to_string(&json!({
                        "id": id,
                        "subreddit": sub,
                        "title": title,
                        "selftext": body,
                        "author": format!("user{}", rng.random_range(1..60)),
                        "created_utc": created,
                        "num_comments": n_comments,
                        "score": rng.random_range(0..200),
                        "upvote_ratio": (rng.random_range(60..=100) as f64) / 100.0,
                        "permalink": format!("/r/{sub}/comments/{id}/"),
                    })).expect("json"));
                    posts.push('\n');
                    for j in 0..n_comments {
                        cid += 1;
                        comments.push_str(&serde_json::to_string(&json!({
                            "comment_id": format!("c{cid:05}"),
                            "parent_id": id,
                            "body": pick(&mut rng, theme.replies()),
                            "author": format!("user{}", rng.random_range(1..60)),
                            // deliberately out of order to exercise thread sorting
                            "created_utc": created + 600 * (n_comments - j) as i64,
                            "score": rng.random_range(-5..50),
                        })).expect("json"));
                        comments.push('\n');
                    }
                }
            }
        }
    }

    let config = json!({
        "posts": "posts.jsonl",
        "comments": "comments.jsonl",
        "geo_map": "geo_map.json",
        "outdir": "out",
        "min_posts_state": 20,
        "min_posts_country_plot": 20,
        "min_cluster_size": 8,
        "min_samples": 5,
        "seed": args.seed,
    });
    let dir = &args.out;
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    let files = [
        ("posts.jsonl", posts),
        ("comments.jsonl", comments),
        ("geo_map.json", corpus_lens::report::to_json_string(&geo)),
        ("config.json", corpus_lens::report::to_json_string(&config)),
        ("truth.json", corpus_lens::report::to_json_string(&json!({"cities": truth, "themes": themes}))),
    ];
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
    }
    eprintln!("gen-fixture: {pid} posts, {cid} comments in {}", dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_conserves_total() {
        assert_eq!(split(100, 3), [34, 33, 33]);
        assert_eq!(split(7, 7).iter().sum::<usize>(), 7);
    }

    #[test]
    fn every_title_passes_the_default_keyword_filter() {
        for t in [Theme::Theft, Theme::Recreation, Theme::Infrastructure] {
            for title in t.titles() {
                let toks = corpus_lens::text::normalize(title);
                assert!(
                    crate::config::DEFAULT_KEYWORDS.iter().any(|k| toks.iter().any(|x| x == k)),
                    "{title}"
                );
            }
        }
    }
}

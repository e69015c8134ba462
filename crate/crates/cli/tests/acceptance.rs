//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Library-level criteria are checked against the naive oracles shared with
//! the core test suite; pipeline criteria drive the built binary.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use corpus_lens::lmm::{fit_random_intercept, icc, Criterion, Observation};
use corpus_lens::sentiment::{polarity_scores, Lexicon};
use corpus_lens::stats::{
    bh_fdr, cliffs_delta, dunn_posthoc, eta_squared, kruskal_wallis, ks_two_sample, mann_whitney_u,
    wilcoxon_differences,
};
use corpus_lens::topics::{hdbscan_rows, mutual_reachability_mst, HdbscanParams};
use oracles::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_budget(start: Instant, budget: Duration) -> Check {
    let t = start.elapsed();
    ensure!(t < budget, "took {t:.1?}, budget {budget:?}");
    Ok(format!("{t:.2?}"))
}

fn formula_consistency() -> Check {
    let cases = [
        (eta_squared(300.06, 23, 21107).unwrap(), 0.013, 0.0005),
        (eta_squared(236.95, 12, 10622).unwrap(), 0.021, 0.0005),
        (icc(0.0027, 0.2451).unwrap(), 0.0109, 0.0002),
        (icc(0.0068, 0.4210).unwrap(), 0.0158, 0.0002),
        // inputs are rounded to 4 decimals, hence the wider band
        (icc(0.0022, 0.0772).unwrap(), 0.0275, 0.002),
        (icc(0.0024, 0.0632).unwrap(), 0.0373, 0.002),
    ];
    for (got, want, tol) in cases {
        ensure!((got - want).abs() <= tol, "{got} vs {want} ± {tol}");
    }
    Ok(format!("{} values within tolerance", cases.len()))
}

fn small_sample(rng: &mut impl Rng) -> Vec<f64> {
    let n = rng.random_range(1..=8);
    (0..n).map(|_| rng.random_range(0..=3) as f64).collect()
}

fn rank_oracles() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let x = small_sample(&mut rng);
        let y = small_sample(&mut rng);
        ensure!(mann_whitney_u(&x, &y, true).unwrap().statistic == brute_u(&x, &y), "U on {x:?} {y:?}");
        ensure!(ks_two_sample(&x, &y).unwrap().statistic == brute_ks(&x, &y), "D on {x:?} {y:?}");
        ensure!(cliffs_delta(&x, &y).unwrap() == brute_delta(&x, &y), "delta on {x:?} {y:?}");

        let k = rng.random_range(3..=5);
        let groups: Vec<Vec<f64>> = (0..k).map(|_| small_sample(&mut rng)).collect();
        let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
        ensure!(kruskal_wallis(&refs).unwrap().statistic == brute_h(&groups), "H on {groups:?}");
        let names: Vec<String> = (0..k).map(|i| format!("g{i}")).collect();
        ensure!(dunn_posthoc(&names, &refs).unwrap().z == brute_dunn_z(&groups), "Dunn z on {groups:?}");
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-3..=3) as f64).collect();
        if d.iter().all(|&v| v == 0.0) {
            continue;
        }
        let p = wilcoxon_differences(&d, Default::default()).unwrap().p_value;
        worst = worst.max((p - sign_flip_p(&d)).abs());
    }
    ensure!(worst < 0.01, "max |p - p_exact| = {worst}");
    let t = within_budget(start, Duration::from_secs(120))?;
    Ok(format!("1000 tied instances exact, Wilcoxon max |dp| {worst:.4}, {t}"))
}

fn bh() -> Check {
    ensure!(BH_FIXTURES.len() == 20, "expected 20 fixed vectors");
    let (mut bitwise, mut worst) = (0, 0);
    for (p, want) in BH_FIXTURES {
        let got = bh_fdr(p).unwrap();
        // the fixtures are exact rationals of the decimal inputs, rounded once;
        // a double input such as 0.06 is already off by up to half an ulp
        let ulps = max_ulps(&got, want);
        ensure!(ulps <= 2, "{p:?}: {got:?} vs {want:?}");
        bitwise += usize::from(ulps == 0);
        worst = worst.max(ulps);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let n = rng.random_range(0..40);
        let p: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.1) { 1.0 } else { rng.random::<f64>() }).collect();
        let adj = bh_fdr(&p).unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        ensure!(idx.windows(2).all(|w| adj[w[0]] <= adj[w[1]]), "not monotone on {p:?}");
        ensure!(adj.iter().zip(&p).all(|(a, q)| a >= q && *a <= 1.0), "not capped on {p:?}");
    }
    Ok(format!("20 fixed vectors ({bitwise} bitwise, max {worst} ulp), monotone and capped on 2000 random"))
}

fn to_obs(groups: &[Vec<f64>]) -> Vec<Observation> {
    groups
        .iter()
        .enumerate()
        .flat_map(|(j, g)| g.iter().map(move |&y| Observation::new(y, format!("c{j:03}"), "U")))
        .collect()
}

fn lmm_recovery() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let groups = simulate_city_design(seed, 25, 8, 0.05, 0.2);
        let (vc, ve) = anova_balanced(&groups);
        let fit = fit_random_intercept(&to_obs(&groups), Criterion::Reml).unwrap();
        worst = worst.max((fit.var_city - vc).abs()).max((fit.var_resid - ve).abs());
    }
    ensure!(worst <= 1e-6, "balanced design off ANOVA by {worst:e}");

    let (vc_true, ve_true) = (0.01, 0.25);
    let (mut vc, mut ve, mut ic) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..20 {
        let groups = simulate_city_design(1000 + seed, 200, 30, vc_true, ve_true);
        let fit = fit_random_intercept(&to_obs(&groups), Criterion::Reml).unwrap();
        vc.push(fit.var_city);
        ve.push(fit.var_resid);
        ic.push(fit.icc);
    }
    let (mvc, mve, mic) = (median(&mut vc), median(&mut ve), median(&mut ic));
    let icc_true = vc_true / (vc_true + ve_true);
    ensure!((mvc / vc_true - 1.0).abs() <= 0.2, "median var_city {mvc}");
    ensure!((mve / ve_true - 1.0).abs() <= 0.2, "median var_resid {mve}");
    ensure!((mic - icc_true).abs() <= 0.005, "median icc {mic} vs {icc_true}");
    let t = within_budget(start, Duration::from_secs(60))?;
    Ok(format!("ANOVA gap {worst:.1e}; medians {mvc:.4}/{mve:.4}, icc {mic:.4}; {t}"))
}

fn hdbscan() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for inst in 0..40 {
        let n = if inst == 0 { 200 } else { rng.random_range(2..=200) };
        let dim = rng.random_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| if inst % 2 == 0 { rng.random_range(-1.0..1.0) } else { rng.random_range(0..4) as f64 })
                    .collect()
            })
            .collect();
        let ms = rng.random_range(1..=10);
        let mut w: Vec<f64> = mutual_reachability_mst(&rows, ms).iter().map(|e| e.weight).collect();
        w.sort_by(f64::total_cmp);
        ensure!(w == brute_mst_weights(&rows, ms), "MST weights differ on instance {inst} (n {n})");
    }
    for seed in 0..10 {
        let (rows, _) = gaussian_blobs(seed, &three_centers(8), 100, 0.05);
        let r = hdbscan_rows(&rows, HdbscanParams { min_cluster_size: 15, min_samples: 15 }).unwrap();
        ensure!(r.k == 3, "seed {seed}: {} clusters", r.k);
        ensure!(r.noise_fraction() <= 0.05, "seed {seed}: noise {}", r.noise_fraction());
    }
    let t = within_budget(start, Duration::from_secs(60))?;
    Ok(format!("40 MSTs exact, 3 blobs x 10 seeds; {t}"))
}

fn sentiment_engine() -> Check {
    #[derive(serde::Deserialize)]
    struct Scored {
        text: String,
        compound: f64,
    }
    let lex = Lexicon::reference();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/reference_scores.jsonl");
    let rows: Vec<Scored> = fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e}", path.display()))?
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    ensure!(rows.len() == 50, "fixture has {} sentences", rows.len());
    let mut worst: f64 = 0.0;
    for r in &rows {
        worst = worst.max((polarity_scores(&r.text, &lex).compound - r.compound).abs());
    }
    ensure!(worst <= 1e-4, "max compound gap {worst}");

    let mut positive: Vec<&str> = lex
        .tokens()
        .filter(|t| t.len() > 2 && t.chars().all(|c| c.is_ascii_lowercase()))
        .filter(|t| lex.valence(t).is_some_and(|v| v > 0.0) && lex.booster(t).is_none() && !lex.is_negation(t))
        .filter(|t| !["kind", "least", "but", "like"].contains(t))
        .collect();
    positive.sort();
    let mut vocab: Vec<&str> = lex.tokens().collect();
    vocab.sort();
    let fill = ["the", "road", "city", "bike", "today", "lane", "street", "commute"];
    let extras = ["not", "very", "but", "!", "!!!", "?", "never", "extremely", ":)", "GOOD", "BAD"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let len = rng.random_range(0..25);
        let seq: Vec<&str> = (0..len)
            .map(|_| match rng.random_range(0..3) {
                0 => *vocab.choose(&mut rng).unwrap(),
                1 => *extras.choose(&mut rng).unwrap(),
                _ => *fill.choose(&mut rng).unwrap(),
            })
            .collect();
        let text = seq.join(" ");
        let s = polarity_scores(&text, &lex);
        ensure!((-1.0..=1.0).contains(&s.compound), "compound out of range on {text:?}");
        let total = s.neg + s.neu + s.pos;
        ensure!(total == 0.0 || (total - 1.0).abs() <= 1e-6, "proportions sum to {total} on {text:?}");

        let w = positive.choose(&mut rng).unwrap();
        let prefix: Vec<&str> = (0..rng.random_range(0..6)).map(|_| *fill.choose(&mut rng).unwrap()).collect();
        let p = prefix.join(" ");
        let c = |t: String| polarity_scores(t.trim(), &lex).compound;
        let base = c(format!("{p} {w}"));
        ensure!(base > 0.0, "{p} {w} not positive");
        ensure!(c(format!("{p} not {w}")) < 0.0, "negation fails on {p} not {w}");
        ensure!(c(format!("{p} very {w}")) >= base, "booster fails on {p} very {w}");
        ensure!(c(format!("{p} {w}!")) >= base, "emphasis fails on {p} {w}!");
    }
    Ok(format!("50 sentences max gap {worst:.1e}; 10000 random sequences"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corpus-lens"))
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic")
}

fn run(cmd: &mut Command) -> std::result::Result<Output, String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{:?} exited {}: {}", cmd, out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out)
}

fn run_all(outdir: &Path, extra: &[&str]) -> std::result::Result<Duration, String> {
    let start = Instant::now();
    let cfg = bundled().join("config.json");
    run(bin().arg("all").arg("--config").arg(cfg).arg("--outdir").arg(outdir).args(extra))?;
    Ok(start.elapsed())
}

fn read_json(p: &Path) -> std::result::Result<Value, String> {
    let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))
}

fn theme_of(terms: &[Value]) -> Option<&'static str> {
    const THEFT: [&str; 6] = ["stolen", "theft", "thieves", "lock", "locks", "cut"];
    const RECREATION: [&str; 6] = ["ride", "trail", "loop", "scenic", "sunset", "weekend"];
    let top: Vec<&str> = terms.iter().take(5).filter_map(|t| t["term"].as_str()).collect();
    let hits = |set: &[&str]| top.iter().filter(|t| set.contains(t)).count();
    match (hits(&THEFT), hits(&RECREATION)) {
        (a, b) if a > b && a >= 2 => Some("theft"),
        (a, b) if b > a && b >= 2 => Some("recreation"),
        _ => None,
    }
}

fn planted_structure() -> Check {
    // the bundled corpus is exactly what the generator writes
    let regen = tempfile::tempdir().map_err(|e| e.to_string())?;
    run(bin().args(["gen-fixture", "--seed", "7", "--out"]).arg(regen.path()))?;
    for f in ["posts.jsonl", "comments.jsonl", "geo_map.json", "config.json", "truth.json"] {
        ensure!(
            fs::read(regen.path().join(f)).ok() == fs::read(bundled().join(f)).ok(),
            "bundled {f} differs from gen-fixture output"
        );
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path();
    let took = run_all(out, &[])?;
    ensure!(took < Duration::from_secs(60), "`all` took {took:.1?}");

    let mut expected: Vec<String> =
        ["sentiment_summary.csv", "aspect_summary.csv", "topics.json", "manifest.json"].map(String::from).into();
    for r in ["US", "EU"] {
        for f in ["lmm_{}.json", "wordfreq_{}.csv", "dist_{}.json", "dunn_{}.csv", "tests/kruskal_{}.json"] {
            expected.push(f.replace("{}", r));
        }
    }
    expected.extend(["tests/regions_mann_whitney.json", "tests/regions_ks.json", "tests/wilcoxon_regions.json"].map(String::from));
    for f in &expected {
        ensure!(out.join(f).is_file(), "missing {f}");
    }

    let topics = read_json(&out.join("topics.json"))?;
    let observed = read_json(&out.join("tables/observed.json"))?;
    let mut notes = Vec::new();
    for r in ["US", "EU"] {
        let rows = topics["regions"][r]["topics"].as_array().ok_or(format!("no topics for {r}"))?;
        let mut means: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for t in rows {
            if let (Some(theme), Some(m)) = (theme_of(t["terms"].as_array().unwrap()), t["mean_sentiment"].as_f64()) {
                means.entry(theme).or_default().push(m);
            }
        }
        let theft = means.get("theft").ok_or(format!("{r}: no theft topic"))?;
        let rec = means.get("recreation").ok_or(format!("{r}: no recreation topic"))?;
        let worst_theft = theft.iter().cloned().fold(f64::MIN, f64::max);
        let best_rec = rec.iter().cloned().fold(f64::MAX, f64::min);
        ensure!(worst_theft < best_rec, "{r}: theft {worst_theft} vs recreation {best_rec}");

        let post = observed[format!("sentiment.{r}.posts.mean")].as_f64().unwrap();
        let comment = observed[format!("sentiment.{r}.comments.mean")].as_f64().unwrap();
        ensure!(comment < post, "{r}: comment mean {comment} not below post mean {post}");
        notes.push(format!("{r} theft {worst_theft:.2} < rec {best_rec:.2}, comments {comment:.2} < posts {post:.2}"));
    }

    // dependency contract
    let empty = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = bundled().join("config.json");
    let o = bin().arg("stats").arg("--config").arg(&cfg).arg("--outdir").arg(empty.path()).output().unwrap();
    let msg = String::from_utf8_lossy(&o.stderr);
    ensure!(o.status.code() == Some(2) && msg.contains("sentiment"), "stats before sentiment: {:?} {msg}", o.status);

    Ok(format!("{}; `all` in {took:.2?}", notes.join("; ")))
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_all(a.path(), &[])?;
    // a different pool size must not change anything either
    run_all(b.path(), &["--threads", "1"])?;
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    ensure!(ta.keys().eq(tb.keys()), "file sets differ");
    for (k, v) in &ta {
        ensure!(tb[k] == *v, "{} differs", k.display());
    }
    Ok(format!("{} files byte-identical", ta.len()))
}

fn regression_mode() -> Check {
    let refpath = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/published_reference.json");
    let reference: BTreeMap<String, f64> =
        serde_json::from_value(read_json(&refpath)?).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_all(dir.path(), &["--reference", refpath.to_str().unwrap()])?;
    let tables = dir.path().join("tables");
    for f in [
        "sentiment_regions.csv",
        "topics.csv",
        "aspects.csv",
        "region_tests.csv",
        "wilcoxon_regions.csv",
        "wilcoxon_units_US.csv",
        "wilcoxon_units_EU.csv",
        "kruskal_US.csv",
        "kruskal_EU.csv",
        "lmm_US.csv",
        "lmm_EU.csv",
        "reference_comparison.csv",
    ] {
        ensure!(tables.join(f).is_file(), "missing tables/{f}");
    }
    let cmp = fs::read_to_string(tables.join("reference_comparison.csv")).unwrap();
    let rows: Vec<&str> = cmp.lines().skip(1).collect();
    ensure!(rows.len() == reference.len(), "{} comparison rows for {} keys", rows.len(), reference.len());
    let observed = rows.iter().filter(|r| !r.split(',').nth(2).unwrap_or("").is_empty()).count();
    // agreement is reported only; the synthetic corpus is not the published dataset
    println!("  reference comparison (reported, not asserted):");
    for r in &rows {
        println!("    {r}");
    }
    Ok(format!("table outputs present; {observed}/{} reference keys observed", reference.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("formula consistency", formula_consistency),
        ("rank-test oracles", rank_oracles),
        ("BH-FDR", bh),
        ("mixed-model recovery", lmm_recovery),
        ("HDBSCAN", hdbscan),
        ("sentiment engine", sentiment_engine),
        ("end-to-end planted structure", planted_structure),
        ("determinism", determinism),
        ("regression mode", regression_mode),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(msg) => println!("criterion {}: PASS {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

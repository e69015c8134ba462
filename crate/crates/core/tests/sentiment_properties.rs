use corpus_lens::sentiment::{polarity_scores, Lexicon};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn positive_words(lex: &Lexicon) -> Vec<String> {
    let mut w: Vec<String> = lex
        .tokens()
        .filter(|t| t.chars().all(|c| c.is_ascii_lowercase()) && t.len() > 1)
        .filter(|t| lex.valence(t).is_some_and(|v| v > 0.0))
        .filter(|t| lex.booster(t).is_none() && !lex.is_negation(t))
        .filter(|t| !["kind", "least", "no", "but", "like"].contains(t))
        .map(String::from)
        .collect();
    w.sort();
    w
}

fn fillers(lex: &Lexicon) -> Vec<&'static str> {
    let f: Vec<&str> = ["the", "road", "city", "bike", "today", "lane", "street", "my", "commute", "on"]
        .into_iter()
        .filter(|t| lex.valence(t).is_none() && lex.booster(t).is_none() && !lex.is_negation(t))
        .collect();
    assert!(f.len() >= 5);
    f
}

#[test]
fn minimal_pairs_hold_for_every_positive_word() {
    let lex = Lexicon::reference();
    let words = positive_words(&lex);
    assert!(words.len() > 1000);
    for w in &words {
        let c = |t: &str| polarity_scores(t, &lex).compound;
        let base = c(w);
        assert!(base > 0.0, "{w}");
        assert!(c(&format!("not {w}")) < 0.0, "not {w}");
        assert!(c(&format!("very {w}")) >= base, "very {w}");
        // tokens of two characters keep attached punctuation, so "ok!" is
        // not the word "ok"; the property is about emphasis, not tokenization
        if w.len() > 2 {
            assert!(c(&format!("{w}!")) >= base, "{w}!");
        }
    }
}

#[test]
fn short_tokens_keep_their_punctuation() {
    let lex = Lexicon::reference();
    assert!(polarity_scores("bl", &lex).compound > 0.0);
    assert_eq!(polarity_scores("bl!", &lex).compound, 0.0);
}

#[test]
fn random_sequences_are_bounded_and_monotone() {
    let lex = Lexicon::reference();
    let words = positive_words(&lex);
    let fill = fillers(&lex);
    let mut all: Vec<String> = lex.tokens().map(String::from).collect();
    all.sort();
    let extras = ["not", "very", "but", "!", "!!!", "?", "kind of", "never", "extremely", "least", ":)", "GOOD", "BAD"];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let len = rng.random_range(0..25);
        let seq: Vec<String> = (0..len)
            .map(|_| match rng.random_range(0..3) {
                0 => all.choose(&mut rng).unwrap().clone(),
                1 => extras.choose(&mut rng).unwrap().to_string(),
                _ => fill.choose(&mut rng).unwrap().to_string(),
            })
            .collect();
        let text = seq.join(" ");
        let s = polarity_scores(&text, &lex);
        assert!((-1.0..=1.0).contains(&s.compound), "{text:?}");

        // monotonicity inside a neutral context
        let w = words.choose(&mut rng).unwrap();
        let prefix: Vec<&str> = (0..rng.random_range(0..6)).map(|_| *fill.choose(&mut rng).unwrap()).collect();
        let p = prefix.join(" ");
        let c = |t: String| polarity_scores(t.trim(), &lex).compound;
        let base = c(format!("{p} {w}"));
        assert!(base > 0.0);
        assert!(c(format!("{p} not {w}")) < 0.0, "{p} not {w}");
        assert!(c(format!("{p} very {w}")) >= base, "{p} very {w}");
        if w.len() > 2 {
            assert!(c(format!("{p} {w}!")) >= base, "{p} {w}!");
        }
    }
}

#[test]
fn scores_do_not_depend_on_thread_count() {
    let lex = Lexicon::reference();
    let texts: Vec<String> = positive_words(&lex).iter().take(500).map(|w| format!("not so {w}!! but ok")).collect();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| lex.score_all(&texts))
    };
    assert_eq!(run(1), run(4));
}

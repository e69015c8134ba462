//! Valence summation with rule adjustments, ported rule for rule from the
//! reference implementation so compound scores agree to rounding.

use super::lexicon::{Lexicon, C_INCR, N_SCALAR};
use super::{Polarity, SentimentScore};

const ALPHA: f64 = 15.0;
const EXCLAMATION_INCR: f64 = 0.292;
const EXCLAMATION_CAP: usize = 4;
const QUESTION_INCR: f64 = 0.18;
const QUESTION_CEIL: f64 = 0.96;
const BUT_BEFORE: f64 = 0.5;
const BUT_AFTER: f64 = 1.5;

/// Python `str.isupper`: at least one cased character and no lowercase ones.
fn is_upper(s: &str) -> bool {
    let mut cased = false;
    for c in s.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

fn is_py_whitespace(c: char) -> bool {
    c.is_whitespace() || ('\x1c'..='\x1f').contains(&c)
}

/// Splits on whitespace and strips surrounding ASCII punctuation, unless that
/// leaves two characters or fewer (emoticons such as `:)` survive intact).
fn words_and_emoticons(text: &str) -> Vec<String> {
    text.split(is_py_whitespace)
        .filter(|t| !t.is_empty())
        .map(|tok| {
            let stripped = tok.trim_matches(|c: char| c.is_ascii_punctuation());
            if stripped.chars().count() <= 2 {
                tok.to_string()
            } else {
                stripped.to_string()
            }
        })
        .collect()
}

/// Some but not all words are ALL CAPS.
fn allcap_differential(words: &[String]) -> bool {
    let caps = words.iter().filter(|w| is_upper(w)).count();
    let diff = words.len() - caps;
    0 < diff && diff < words.len()
}

pub fn normalize_score(score: f64) -> f64 {
    (score / (score * score + ALPHA).sqrt()).clamp(-1.0, 1.0)
}

struct Sentence<'a> {
    words: Vec<String>,
    lower: Vec<String>,
    cap_diff: bool,
    lex: &'a Lexicon,
}

impl Sentence<'_> {
    fn negated(&self, lower: &str) -> bool {
        self.lex.is_negation(lower) || lower.contains("n't")
    }

    fn scalar_inc_dec(&self, idx: usize, valence: f64) -> f64 {
        let Some(mut scalar) = self.lex.booster(&self.lower[idx]) else {
            return 0.0;
        };
        if valence < 0.0 {
            scalar *= -1.0;
        }
        if is_upper(&self.words[idx]) && self.cap_diff {
            if valence > 0.0 {
                scalar += C_INCR;
            } else {
                scalar -= C_INCR;
            }
        }
        scalar
    }

    fn negation_check(&self, mut valence: f64, start: usize, i: usize) -> f64 {
        let w = &self.lower;
        match start {
            0 => {
                if self.negated(&w[i - 1]) {
                    valence *= N_SCALAR;
                }
            }
            1 => {
                if w[i - 2] == "never" && (w[i - 1] == "so" || w[i - 1] == "this") {
                    valence *= 1.25;
                } else if w[i - 2] == "without" && w[i - 1] == "doubt" {
                } else if self.negated(&w[i - 2]) {
                    valence *= N_SCALAR;
                }
            }
            _ => {
                // the reference groups this as (never && so|this) || (prev == so|this)
                if (w[i - 3] == "never" && (w[i - 2] == "so" || w[i - 2] == "this"))
                    || (w[i - 1] == "so" || w[i - 1] == "this")
                {
                    valence *= 1.25;
                } else if w[i - 3] == "without" && (w[i - 2] == "doubt" || w[i - 1] == "doubt") {
                } else if self.negated(&w[i - 3]) {
                    valence *= N_SCALAR;
                }
            }
        }
        valence
    }

    fn special_idioms_check(&self, mut valence: f64, i: usize) -> f64 {
        let w = &self.lower;
        let onezero = format!("{} {}", w[i - 1], w[i]);
        let twoonezero = format!("{} {} {}", w[i - 2], w[i - 1], w[i]);
        let twoone = format!("{} {}", w[i - 2], w[i - 1]);
        let threetwoone = format!("{} {} {}", w[i - 3], w[i - 2], w[i - 1]);
        let threetwo = format!("{} {}", w[i - 3], w[i - 2]);

        for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
            if let Some(v) = self.lex.special_case(seq) {
                valence = v;
                break;
            }
        }
        if w.len() - 1 > i {
            if let Some(v) = self.lex.special_case(&format!("{} {}", w[i], w[i + 1])) {
                valence = v;
            }
        }
        if w.len() - 1 > i + 1 {
            let zeroonetwo = format!("{} {} {}", w[i], w[i + 1], w[i + 2]);
            if let Some(v) = self.lex.special_case(&zeroonetwo) {
                valence = v;
            }
        }
        for ngram in [&threetwoone, &threetwo, &twoone] {
            if let Some(b) = self.lex.booster(ngram) {
                valence += b;
            }
        }
        valence
    }

    fn least_check(&self, mut valence: f64, i: usize) -> f64 {
        let w = &self.lower;
        if i > 1 && !self.lex.contains(&w[i - 1]) && w[i - 1] == "least" {
            if w[i - 2] != "at" && w[i - 2] != "very" {
                valence *= N_SCALAR;
            }
        } else if i > 0 && !self.lex.contains(&w[i - 1]) && w[i - 1] == "least" {
            valence *= N_SCALAR;
        }
        valence
    }

    fn valence_at(&self, i: usize) -> f64 {
        let w = &self.lower;
        let Some(base) = self.lex.valence(&w[i]) else {
            return 0.0;
        };
        let mut valence = base;
        if w[i] == "no" && i != w.len() - 1 && self.lex.contains(&w[i + 1]) {
            valence = 0.0;
        }
        if (i > 0 && w[i - 1] == "no")
            || (i > 1 && w[i - 2] == "no")
            || (i > 2 && w[i - 3] == "no" && (w[i - 1] == "or" || w[i - 1] == "nor"))
        {
            valence = base * N_SCALAR;
        }
        if is_upper(&self.words[i]) && self.cap_diff {
            if valence > 0.0 {
                valence += C_INCR;
            } else {
                valence -= C_INCR;
            }
        }
        for start in 0..3 {
            if i > start && !self.lex.contains(&w[i - (start + 1)]) {
                let mut s = self.scalar_inc_dec(i - (start + 1), valence);
                if start == 1 && s != 0.0 {
                    s *= 0.95;
                }
                if start == 2 && s != 0.0 {
                    s *= 0.9;
                }
                valence += s;
                valence = self.negation_check(valence, start, i);
                if start == 2 {
                    valence = self.special_idioms_check(valence, i);
                }
            }
        }
        self.least_check(valence, i)
    }

    fn valences(&self) -> Vec<f64> {
        let w = &self.lower;
        let mut out = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            if self.lex.booster(&w[i]).is_some()
                || (i + 1 < w.len() && w[i] == "kind" && w[i + 1] == "of")
            {
                out.push(0.0);
                continue;
            }
            out.push(self.valence_at(i));
        }
        but_check(w, &mut out);
        out
    }
}

/// Contrastive "but": halves valences before it and boosts those after it.
///
/// Mirrors the reference exactly, including its lookup of each value's first
/// occurrence, which rewrites the earliest equal valence.
fn but_check(lower: &[String], sentiments: &mut [f64]) {
    let Some(bi) = lower.iter().position(|w| w == "but") else {
        return;
    };
    for p in 0..sentiments.len() {
        let v = sentiments[p];
        let si = sentiments.iter().position(|&x| x == v).unwrap_or(p);
        if si < bi {
            sentiments[si] = v * BUT_BEFORE;
        } else if si > bi {
            sentiments[si] = v * BUT_AFTER;
        }
    }
}

fn punctuation_emphasis(text: &str) -> f64 {
    let ep = text.matches('!').count().min(EXCLAMATION_CAP) as f64 * EXCLAMATION_INCR;
    let qm_count = text.matches('?').count();
    let qm = if qm_count > 1 {
        if qm_count <= 3 {
            qm_count as f64 * QUESTION_INCR
        } else {
            QUESTION_CEIL
        }
    } else {
        0.0
    };
    ep + qm
}

fn score_valence(sentiments: &[f64], text: &str) -> SentimentScore {
    if sentiments.is_empty() {
        return SentimentScore {
            neg: 0.0,
            neu: 0.0,
            pos: 0.0,
            compound: 0.0,
            polarity: Polarity::Neutral,
        };
    }
    let mut sum: f64 = sentiments.iter().sum();
    let punct = punctuation_emphasis(text);
    if sum > 0.0 {
        sum += punct;
    } else if sum < 0.0 {
        sum -= punct;
    }
    let compound = normalize_score(sum);

    let (mut pos_sum, mut neg_sum, mut neu_count) = (0.0, 0.0, 0usize);
    for &s in sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        }
        if s < 0.0 {
            neg_sum += s - 1.0;
        }
        if s == 0.0 {
            neu_count += 1;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += punct;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= punct;
    }
    let total = pos_sum + neg_sum.abs() + neu_count as f64;
    SentimentScore {
        neg: (neg_sum / total).abs(),
        neu: (neu_count as f64 / total).abs(),
        pos: (pos_sum / total).abs(),
        compound,
        polarity: Polarity::from_compound(compound),
    }
}

/// Scores one document. Unknown tokens contribute zero valence.
pub fn polarity_scores(text: &str, lex: &Lexicon) -> SentimentScore {
    let text = text.trim_matches(is_py_whitespace);
    let words = words_and_emoticons(text);
    let lower = words.iter().map(|w| w.to_lowercase()).collect();
    let sentence = Sentence {
        cap_diff: allcap_differential(&words),
        words,
        lower,
        lex,
    };
    score_valence(&sentence.valences(), text)
}

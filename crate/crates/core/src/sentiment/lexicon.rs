use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::SentimentError;

const REFERENCE_LEXICON: &str = include_str!("../../assets/vader_lexicon.tsv");

/// Empirical increment for booster words.
pub const B_INCR: f64 = 0.293;
pub const B_DECR: f64 = -0.293;
/// Empirical increment for an ALL-CAPS word in mixed-case text.
pub const C_INCR: f64 = 0.733;
/// Multiplier applied to a negated valence.
pub const N_SCALAR: f64 = -0.74;

pub(crate) const NEGATIONS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

const BOOSTERS_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
    "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce",
    "scarcely", "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

/// Multi-word expressions whose valence overrides the word-level one.
pub(crate) const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub valence: f64,
    pub stddev: Option<f64>,
    pub ratings: Vec<i32>,
}

/// Token valences plus the booster, negation and idiom tables.
///
/// Tokens are stored exactly as they appear in the TSV; lookups lowercase the
/// probe, so entries containing uppercase letters (some emoticons) are unreachable,
/// just as in the reference implementation.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashMap<String, LexiconEntry>,
    boosters: HashMap<String, f64>,
    negations: HashSet<String>,
    special_cases: HashMap<String, f64>,
}

fn parse_ratings(raw: &str) -> Result<Vec<i32>, String> {
    let inner = raw
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("ratings field {raw:?} is not a bracketed list"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|v| v.trim().parse::<i32>().map_err(|e| format!("rating {v:?}: {e}")))
        .collect()
}

impl Lexicon {
    /// The bundled reference lexicon (7,500+ entries, MIT licensed).
    pub fn reference() -> Self {
        Self::from_tsv(REFERENCE_LEXICON).expect("bundled lexicon is well-formed")
    }

    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let content = fs::read_to_string(path).map_err(|e| SentimentError::Lexicon {
            line: 0,
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_tsv(&content)
    }

    /// Parses `token<TAB>mean<TAB>stddev<TAB>raw_ratings` lines. Later duplicates win.
    pub fn from_tsv(content: &str) -> Result<Self, SentimentError> {
        let mut entries = HashMap::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| SentimentError::Lexicon { line: i + 1, reason };
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or_default();
            let valence: f64 = fields
                .next()
                .ok_or_else(|| err("missing valence column".into()))?
                .trim()
                .parse()
                .map_err(|e| err(format!("valence: {e}")))?;
            if !valence.is_finite() {
                return Err(err("non-finite valence".into()));
            }
            let stddev = match fields.next() {
                Some(s) => Some(s.trim().parse::<f64>().map_err(|e| err(format!("stddev: {e}")))?),
                None => None,
            };
            let ratings = match fields.next() {
                Some(r) => parse_ratings(r).map_err(err)?,
                None => Vec::new(),
            };
            entries.insert(
                token.to_string(),
                LexiconEntry {
                    valence,
                    stddev,
                    ratings,
                },
            );
        }
        let boosters = BOOSTERS_UP
            .iter()
            .map(|w| (w.to_string(), B_INCR))
            .chain(BOOSTERS_DOWN.iter().map(|w| (w.to_string(), B_DECR)))
            .collect();
        Ok(Lexicon {
            entries,
            boosters,
            negations: NEGATIONS.iter().map(|w| w.to_string()).collect(),
            special_cases: SPECIAL_CASES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, token: &str) -> Option<&LexiconEntry> {
        self.entries.get(token)
    }

    /// Valence of an already-lowercased token.
    pub fn valence(&self, lower: &str) -> Option<f64> {
        self.entries.get(lower).map(|e| e.valence)
    }

    /// All tokens, in no particular order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub(crate) fn contains(&self, lower: &str) -> bool {
        self.entries.contains_key(lower)
    }

    /// Booster increment (negative for dampeners) of a lowercased word.
    pub fn booster(&self, lower: &str) -> Option<f64> {
        self.boosters.get(lower).copied()
    }

    pub fn is_negation(&self, lower: &str) -> bool {
        self.negations.contains(lower)
    }

    pub(crate) fn special_case(&self, phrase: &str) -> Option<f64> {
        self.special_cases.get(phrase).copied()
    }
}

//! Text normalization shared by keyword filtering, aspect matching,
//! c-TF-IDF tokenization and word-frequency tables.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;

const DEFAULT_STOPWORDS: &str = include_str!("../assets/stopwords_en.txt");

/// Lowercases `text` and splits it on every non-alphanumeric character.
///
/// Punctuation acts as a separator, so `"Bike-Lane!"` yields `["bike", "lane"]`.
pub fn normalize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// True when `needle` occurs as a contiguous run inside `haystack`.
pub fn contains_phrase(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Stopwords(BTreeSet::new())
    }

    /// One term per line; blank lines and `#` comments are skipped.
    pub fn parse(contents: &str) -> Self {
        Stopwords(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

/// Normalized tokens with stopwords and tokens shorter than two characters removed.
pub fn content_tokens(text: &str, stopwords: &Stopwords) -> Vec<String> {
    normalize(text)
        .into_iter()
        .filter(|t| t.chars().count() >= 2 && !stopwords.contains(t))
        .collect()
}

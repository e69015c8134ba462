//! Keyword-driven aspect assignment and per-region aspect sentiment summaries.
//!
//! A document is assigned every aspect for which at least one keyword phrase
//! occurs as a contiguous token run of its normalized text. Assignment only
//! looks at text, so the same lexicon behaves identically in every region.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::describe;
use crate::text::{contains_phrase, normalize};

const DEFAULT_LEXICON: &str = include_str!("../assets/aspect_lexicon.json");

#[derive(Debug, Error)]
pub enum AspectError {
    #[error("aspect lexicon: {0}")]
    Lexicon(String),
    #[error("no sentiment score for document {0}")]
    MissingSentiment(String),
    #[error("no region for document {0}")]
    MissingRegion(String),
}

/// The nine infrastructure aspects, in canonical reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Aspect {
    #[serde(rename = "protected lanes")]
    ProtectedLanes,
    #[serde(rename = "painted lanes")]
    PaintedLanes,
    #[serde(rename = "bike lanes (general)")]
    BikeLanesGeneral,
    #[serde(rename = "paths and trails")]
    PathsAndTrails,
    #[serde(rename = "parking and storage")]
    ParkingAndStorage,
    #[serde(rename = "intersections and signals")]
    IntersectionsAndSignals,
    #[serde(rename = "transit integration")]
    TransitIntegration,
    #[serde(rename = "construction and roadworks")]
    ConstructionAndRoadworks,
    #[serde(rename = "general infrastructure")]
    GeneralInfrastructure,
}

impl Aspect {
    pub const ALL: [Aspect; 9] = [
        Aspect::ProtectedLanes,
        Aspect::PaintedLanes,
        Aspect::BikeLanesGeneral,
        Aspect::PathsAndTrails,
        Aspect::ParkingAndStorage,
        Aspect::IntersectionsAndSignals,
        Aspect::TransitIntegration,
        Aspect::ConstructionAndRoadworks,
        Aspect::GeneralInfrastructure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aspect::ProtectedLanes => "protected lanes",
            Aspect::PaintedLanes => "painted lanes",
            Aspect::BikeLanesGeneral => "bike lanes (general)",
            Aspect::PathsAndTrails => "paths and trails",
            Aspect::ParkingAndStorage => "parking and storage",
            Aspect::IntersectionsAndSignals => "intersections and signals",
            Aspect::TransitIntegration => "transit integration",
            Aspect::ConstructionAndRoadworks => "construction and roadworks",
            Aspect::GeneralInfrastructure => "general infrastructure",
        }
    }

    pub fn from_name(name: &str) -> Option<Aspect> {
        Aspect::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspectLexicon {
    phrases: BTreeMap<Aspect, Vec<Vec<String>>>,
}

impl AspectLexicon {
    /// Parses `{ "<aspect>": ["phrase", ...] }`; all nine aspects must be present.
    pub fn from_json(json: &str) -> Result<Self, AspectError> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(json).map_err(|e| AspectError::Lexicon(e.to_string()))?;
        let mut phrases = BTreeMap::new();
        for (name, list) in raw {
            let aspect = Aspect::from_name(&name)
                .ok_or_else(|| AspectError::Lexicon(format!("unknown aspect {name:?}")))?;
            let toks: Vec<Vec<String>> = list
                .iter()
                .map(|p| normalize(p))
                .filter(|t| !t.is_empty())
                .collect();
            phrases.insert(aspect, toks);
        }
        let missing: Vec<_> = Aspect::ALL
            .iter()
            .filter(|a| !phrases.contains_key(a))
            .map(|a| a.name())
            .collect();
        if !missing.is_empty() {
            return Err(AspectError::Lexicon(format!("missing aspects: {}", missing.join(", "))));
        }
        Ok(AspectLexicon { phrases })
    }

    pub fn load(path: &Path) -> Result<Self, AspectError> {
        let s = fs::read_to_string(path)
            .map_err(|e| AspectError::Lexicon(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn add_phrase(&mut self, aspect: Aspect, phrase: &str) {
        let toks = normalize(phrase);
        if !toks.is_empty() {
            self.phrases.entry(aspect).or_default().push(toks);
        }
    }

    pub fn phrases(&self, aspect: Aspect) -> &[Vec<String>] {
        self.phrases.get(&aspect).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn match_text(&self, text: &str) -> BTreeSet<Aspect> {
        let toks = normalize(text);
        self.phrases
            .iter()
            .filter(|(_, ps)| ps.iter().any(|p| contains_phrase(&toks, p)))
            .map(|(a, _)| *a)
            .collect()
    }
}

impl Default for AspectLexicon {
    fn default() -> Self {
        Self::from_json(DEFAULT_LEXICON).expect("bundled aspect lexicon is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectAssignment {
    pub doc_id: String,
    pub aspects: BTreeSet<Aspect>,
}

pub fn match_aspects(doc_id: &str, text: &str, lexicon: &AspectLexicon) -> AspectAssignment {
    AspectAssignment {
        doc_id: doc_id.to_string(),
        aspects: lexicon.match_text(text),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspectRow {
    pub region: String,
    pub aspect: Aspect,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
}

/// Per region × aspect count, mean and median compound, sorted by
/// (region, canonical aspect order). Empty cells produce no row.
pub fn aspect_summary(
    assignments: &[AspectAssignment],
    sentiments: &HashMap<String, f64>,
    regions: &HashMap<String, String>,
) -> Result<Vec<AspectRow>, AspectError> {
    let mut cells: BTreeMap<(String, Aspect), BTreeMap<&str, f64>> = BTreeMap::new();
    for a in assignments {
        if a.aspects.is_empty() {
            continue;
        }
        let s = *sentiments
            .get(&a.doc_id)
            .ok_or_else(|| AspectError::MissingSentiment(a.doc_id.clone()))?;
        let region = regions
            .get(&a.doc_id)
            .ok_or_else(|| AspectError::MissingRegion(a.doc_id.clone()))?;
        for &aspect in &a.aspects {
            // keyed by doc id so a repeated assignment counts once
            cells
                .entry((region.clone(), aspect))
                .or_default()
                .insert(a.doc_id.as_str(), s);
        }
    }
    Ok(cells
        .into_iter()
        .map(|((region, aspect), docs)| {
            let vals: Vec<f64> = docs.into_values().collect();
            AspectRow {
                region,
                aspect,
                n: vals.len(),
                mean: describe::mean(&vals),
                median: describe::median(&vals),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_lexicon() -> AspectLexicon {
        let mut json: BTreeMap<&str, Vec<&str>> = Aspect::ALL.iter().map(|a| (a.name(), vec![])).collect();
        json.insert("protected lanes", vec!["protected lane", "protected bike lane"]);
        json.insert("bike lanes (general)", vec!["bike lane"]);
        AspectLexicon::from_json(&serde_json::to_string(&json).unwrap()).unwrap()
    }

    #[test]
    fn matches_contiguous_phrases() {
        let lex = small_lexicon();
        let got = lex.match_text("new protected bike lane");
        assert_eq!(
            got.into_iter().collect::<Vec<_>>(),
            [Aspect::ProtectedLanes, Aspect::BikeLanesGeneral]
        );
        assert!(lex.match_text("lost my saddle bag").is_empty());
        assert!(lex.match_text("").is_empty());
    }

    #[test]
    fn lexicon_must_name_all_nine_aspects() {
        assert!(AspectLexicon::from_json(r#"{"protected lanes": ["x"]}"#).is_err());
        let mut json: BTreeMap<&str, Vec<&str>> = Aspect::ALL.iter().map(|a| (a.name(), vec![])).collect();
        json.insert("bogus", vec![]);
        assert!(AspectLexicon::from_json(&serde_json::to_string(&json).unwrap()).is_err());
    }

    #[test]
    fn adding_a_keyword_never_removes_an_assignment() {
        let mut lex = small_lexicon();
        let text = "the painted lane next to the bike lane";
        let before = lex.match_text(text);
        lex.add_phrase(Aspect::PaintedLanes, "painted lane");
        let after = lex.match_text(text);
        assert!(before.is_subset(&after));
        assert!(after.contains(&Aspect::PaintedLanes));
    }

    #[test]
    fn default_lexicon_loads() {
        let lex = AspectLexicon::default();
        for a in Aspect::ALL {
            assert!(!lex.phrases(a).is_empty(), "{a}");
        }
        assert!(lex.match_text("Separated cycle-track!").contains(&Aspect::ProtectedLanes));
    }

    #[test]
    fn summary_mean_median_and_omission() {
        let assignments = vec![
            AspectAssignment { doc_id: "a".into(), aspects: [Aspect::PathsAndTrails].into() },
            AspectAssignment { doc_id: "b".into(), aspects: [Aspect::PathsAndTrails].into() },
            AspectAssignment { doc_id: "c".into(), aspects: BTreeSet::new() },
        ];
        let sent: HashMap<String, f64> =
            [("a".into(), 0.1), ("b".into(), 0.3), ("c".into(), 0.9)].into();
        let reg: HashMap<String, String> =
            [("a".into(), "US".into()), ("b".into(), "US".into()), ("c".into(), "US".into())].into();
        let rows = aspect_summary(&assignments, &sent, &reg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 2);
        assert!((rows[0].mean - 0.2).abs() < 1e-12);
        assert!((rows[0].median - 0.2).abs() < 1e-12);
    }

    #[test]
    fn summary_requires_sentiment() {
        let assignments = vec![AspectAssignment { doc_id: "a".into(), aspects: [Aspect::PathsAndTrails].into() }];
        let reg: HashMap<String, String> = [("a".into(), "US".into())].into();
        assert!(matches!(
            aspect_summary(&assignments, &HashMap::new(), &reg),
            Err(AspectError::MissingSentiment(_))
        ));
    }

    #[test]
    fn summary_rows_sorted_by_region_then_canonical_order() {
        let assignments = vec![
            AspectAssignment {
                doc_id: "u".into(),
                aspects: [Aspect::GeneralInfrastructure, Aspect::ProtectedLanes].into(),
            },
            AspectAssignment { doc_id: "e".into(), aspects: [Aspect::TransitIntegration].into() },
        ];
        let sent: HashMap<String, f64> = [("u".into(), 0.5), ("e".into(), -0.5)].into();
        let reg: HashMap<String, String> = [("u".into(), "US".into()), ("e".into(), "EU".into())].into();
        let rows = aspect_summary(&assignments, &sent, &reg).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.region.as_str(), r.aspect)).collect();
        assert_eq!(
            keys,
            [
                ("EU", Aspect::TransitIntegration),
                ("US", Aspect::ProtectedLanes),
                ("US", Aspect::GeneralInfrastructure)
            ]
        );
        // multi-assignment: total N exceeds the number of assigned posts
        assert_eq!(rows.iter().map(|r| r.n).sum::<usize>(), 3);
    }
}

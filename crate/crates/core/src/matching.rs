//! Runtime lookup: field name → concept → the bin option nearest the data.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::concepts::{concept_phrases, normalize_text, BinConcept, BinOption, SemanticLookupTable};
use crate::error::{Error, Result};
use crate::ingest::SeriesProfile;
use crate::scheme::{BinScheme, Grain, Provenance};
use crate::text::{edit_similarity, PhraseSet};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.85;
pub const DEFAULT_MIN_COVERAGE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub threshold: f64,
    /// Options overlapping less than this share of the data range are
    /// never applied.
    pub min_coverage: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            threshold: DEFAULT_MATCH_THRESHOLD,
            min_coverage: DEFAULT_MIN_COVERAGE,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("threshold", self.threshold), ("min_coverage", self.min_coverage)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} {v} not in [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptMatch {
    pub concept: String,
    pub matched_term: String,
    pub similarity: f64,
}

struct Normalized {
    joined: String,
    words: BTreeSet<String>,
}

fn normalized(text: &str, phrases: &PhraseSet) -> Normalized {
    let tokens = normalize_text(text, phrases);
    Normalized {
        words: tokens
            .iter()
            .flat_map(|t| t.split('_'))
            .map(str::to_string)
            .collect(),
        joined: tokens.join("_"),
    }
}

/// Max of edit similarity on the joined lemma strings and the share of the
/// term's words present in the field.
fn similarity(field: &Normalized, term: &Normalized) -> f64 {
    if field.joined.is_empty() || term.joined.is_empty() {
        return 0.0;
    }
    let overlap = term.words.intersection(&field.words).count() as f64 / term.words.len() as f64;
    edit_similarity(&field.joined, &term.joined).max(overlap)
}

/// Best concept for `field_name` at or above `threshold`. Ties go to the
/// lexicographically smaller concept id, then to the earlier term.
pub fn match_concept(field_name: &str, table: &SemanticLookupTable, threshold: f64) -> Option<ConceptMatch> {
    let phrases = concept_phrases(&table.concepts);
    let field = normalized(field_name, &phrases);
    let mut concepts: Vec<&BinConcept> = table.concepts.iter().collect();
    concepts.sort_by(|a, b| a.id.cmp(&b.id));

    let mut best: Option<ConceptMatch> = None;
    for c in concepts {
        for term in c.terms() {
            let s = similarity(&field, &normalized(term, &phrases));
            if s >= threshold && best.as_ref().is_none_or(|b| s > b.similarity) {
                best = Some(ConceptMatch {
                    concept: c.id.clone(),
                    matched_term: term.to_string(),
                    similarity: s,
                });
            }
        }
    }
    best
}

/// Bins the option produces: one per break gap plus any open tails.
pub fn option_bin_count(option: &BinOption) -> usize {
    option.breaks.len() - 1 + usize::from(option.open_low) + usize::from(option.open_high)
}

/// Option breaks are declared boundaries; an open side adds an unbounded
/// bin past the outermost break. The scheme gives that bin a nominal edge
/// one neighbouring width away.
pub fn option_scheme(option: &BinOption, concept: &str, grain: Grain) -> Result<BinScheme> {
    option.validate()?;
    let b = &option.breaks;
    let mut edges = Vec::with_capacity(b.len() + 2);
    if option.open_low {
        edges.push(b[0] - (b[1] - b[0]));
    }
    edges.extend_from_slice(b);
    if option.open_high {
        let n = b.len();
        edges.push(b[n - 1] + (b[n - 1] - b[n - 2]));
    }
    BinScheme::new(
        edges,
        option.open_low,
        option.open_high,
        Provenance::Semantic(concept.to_string()),
        grain,
    )
}

/// `(|first − min| + |last − max|) / (max − min + grain)`.
pub fn option_distance(option: &BinOption, profile: &SeriesProfile) -> f64 {
    let first = option.breaks[0];
    let last = option.breaks[option.breaks.len() - 1];
    ((first - profile.min).abs() + (last - profile.max).abs()) / (profile.range() + profile.grain.step_f64())
}

/// Share of the data range inside the option's finite breaks. A constant
/// column counts as covered when its value lies within the breaks.
pub fn option_coverage(option: &BinOption, profile: &SeriesProfile) -> f64 {
    let first = option.breaks[0];
    let last = option.breaks[option.breaks.len() - 1];
    let range = profile.range();
    if range <= 0.0 {
        return if (first..=last).contains(&profile.min) { 1.0 } else { 0.0 };
    }
    let overlap = last.min(profile.max) - first.max(profile.min);
    (overlap / range).clamp(0.0, 1.0)
}

fn pick<'a>(options: impl Iterator<Item = &'a BinOption>, profile: &SeriesProfile) -> Option<&'a BinOption> {
    options
        .map(|o| (option_distance(o, profile), o))
        .min_by(|(da, a), (db, b)| {
            da.total_cmp(db)
                .then_with(|| b.source_count.cmp(&a.source_count))
                .then_with(|| a.canonical().cmp(&b.canonical()))
        })
        .map(|(_, o)| o)
}

/// The option closest to the data bounds; `None` only when there are no
/// options.
pub fn select_bin_option<'a>(concept: &'a BinConcept, profile: &SeriesProfile) -> Option<&'a BinOption> {
    pick(concept.bin_options.iter(), profile)
}

/// What the semantic half of the pipeline decided for one field.
#[derive(Debug, Clone, PartialEq)]
pub enum SemanticOutcome {
    Applied {
        matched: ConceptMatch,
        option: BinOption,
        scheme: BinScheme,
    },
    NoMatch,
    NoOptions(ConceptMatch),
    /// Every option failed the coverage guard or the bin-count cap.
    Rejected(ConceptMatch),
}

impl SemanticOutcome {
    pub fn scheme(&self) -> Option<&BinScheme> {
        match self {
            SemanticOutcome::Applied { scheme, .. } => Some(scheme),
            _ => None,
        }
    }

    pub fn matched(&self) -> Option<&ConceptMatch> {
        match self {
            SemanticOutcome::Applied { matched, .. }
            | SemanticOutcome::NoOptions(matched)
            | SemanticOutcome::Rejected(matched) => Some(matched),
            SemanticOutcome::NoMatch => None,
        }
    }

    /// One-line reason when no semantic scheme was produced.
    pub fn note(&self) -> Option<String> {
        match self {
            SemanticOutcome::Applied { .. } => None,
            SemanticOutcome::NoMatch => Some("no semantic match for this field".into()),
            SemanticOutcome::NoOptions(m) => Some(format!("concept {:?} has no bin options", m.concept)),
            SemanticOutcome::Rejected(m) => Some(format!(
                "no bin option of concept {:?} fits the data range",
                m.concept
            )),
        }
    }
}

/// Matches, filters options by coverage and `max_bins`, selects and
/// converts. Labels use the data grain.
pub fn resolve_semantic(
    field_name: &str,
    profile: &SeriesProfile,
    table: &SemanticLookupTable,
    cfg: &MatchConfig,
    max_bins: usize,
) -> Result<SemanticOutcome> {
    cfg.validate()?;
    let Some(matched) = match_concept(field_name, table, cfg.threshold) else {
        return Ok(SemanticOutcome::NoMatch);
    };
    let concept = table
        .concept(&matched.concept)
        .expect("matched concept is in the table");
    if concept.bin_options.is_empty() {
        return Ok(SemanticOutcome::NoOptions(matched));
    }
    let eligible = concept.bin_options.iter().filter(|o| {
        option_bin_count(o) <= max_bins && option_coverage(o, profile) >= cfg.min_coverage
    });
    let Some(option) = pick(eligible, profile) else {
        return Ok(SemanticOutcome::Rejected(matched));
    };
    let scheme = option_scheme(option, &concept.id, profile.grain)?;
    Ok(SemanticOutcome::Applied {
        matched,
        option: option.clone(),
        scheme,
    })
}

pub fn semantic_bins(
    field_name: &str,
    profile: &SeriesProfile,
    table: &SemanticLookupTable,
    cfg: &MatchConfig,
    max_bins: usize,
) -> Result<Option<BinScheme>> {
    Ok(resolve_semantic(field_name, profile, table, cfg, max_bins)?
        .scheme()
        .cloned())
}

//! Offline construction of the semantic lookup table.
//!
//! A topic model is trained over binned field names and survey question
//! text. Each topic is aligned to the bin concept whose terms carry the most
//! probability mass in it, and survey questions inherit the concept of their
//! dominant topic, contributing their answer-option breaks as bin options.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lda::{train_lda, Corpus, Document, LdaParams, TopicModel};
use crate::scheme::validate_edges;
use crate::text::{lemmatize, tokenize, PhraseSet};

pub const DEFAULT_THRESHOLD: f64 = 0.06;
pub const DEFAULT_TOP_FIELDS: usize = 100;
pub const DEFAULT_ITERATIONS: usize = 1000;
const LOOKUP_VERSION: &str = "1";

static BUNDLED_CONCEPTS: &str = include_str!("../data/concepts.json");

/// Conventional breaks for a concept, with how many sources used them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinOption {
    pub breaks: Vec<f64>,
    #[serde(default)]
    pub open_low: bool,
    #[serde(default)]
    pub open_high: bool,
    #[serde(default = "one")]
    pub source_count: u64,
}

fn one() -> u64 {
    1
}

impl BinOption {
    pub fn validate(&self) -> Result<()> {
        validate_edges(&self.breaks)
    }

    fn key(&self) -> (Vec<u64>, bool, bool) {
        (
            self.breaks.iter().map(|b| b.to_bits()).collect(),
            self.open_low,
            self.open_high,
        )
    }

    /// Serialization used as the final tie-break between options.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinConcept {
    pub id: String,
    pub label: String,
    /// Related terms exactly as shipped (synonyms, near-synonyms, phrases).
    pub related: Vec<String>,
    #[serde(default)]
    pub bin_options: Vec<BinOption>,
}

impl BinConcept {
    /// The label together with its related terms, duplicates removed.
    pub fn terms(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        std::iter::once(self.label.as_str())
            .chain(self.related.iter().map(String::as_str))
            .filter(|t| seen.insert(t.trim().to_lowercase()))
            .collect()
    }

    /// Terms in corpus-token form: tokenized, lemmatized, joined by `_`.
    pub fn term_tokens(&self, phrases: &PhraseSet) -> BTreeSet<String> {
        self.terms()
            .into_iter()
            .map(|t| normalize_text(t, phrases).join("_"))
            .filter(|t| !t.is_empty())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::InvalidConfig("concept id is empty".into()));
        }
        for o in &self.bin_options {
            o.validate()?;
        }
        Ok(())
    }
}

/// Tokenize then lemmatize; the one normalization used for corpora,
/// concept terms and field names alike.
pub fn normalize_text(text: &str, phrases: &PhraseSet) -> Vec<String> {
    tokenize(text, phrases).iter().map(|t| lemmatize(t)).collect()
}

/// Every multiword term across `concepts`.
pub fn concept_phrases(concepts: &[BinConcept]) -> PhraseSet {
    PhraseSet::new(concepts.iter().flat_map(|c| c.terms()))
}

/// The shipped concept seed list.
pub fn bundled_concepts() -> Vec<BinConcept> {
    parse_concepts(BUNDLED_CONCEPTS).expect("bundled concepts parse")
}

pub fn parse_concepts(json: &str) -> Result<Vec<BinConcept>> {
    let concepts: Vec<BinConcept> = serde_json::from_str(json)?;
    let mut ids = HashSet::new();
    for c in &concepts {
        c.validate()?;
        if !ids.insert(c.id.clone()) {
            return Err(Error::InvalidConfig(format!("duplicate concept id {:?}", c.id)));
        }
    }
    Ok(concepts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyQuestion {
    #[serde(deserialize_with = "string_or_number")]
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub breaks: Vec<f64>,
    #[serde(default)]
    pub open_low: bool,
    #[serde(default)]
    pub open_high: bool,
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!("id must be a string or number, got {other}"))),
    }
}

/// One JSON object per line; blank lines are ignored.
pub fn parse_surveys(jsonl: &str) -> Result<Vec<SurveyQuestion>> {
    jsonl
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// `name` or `name<TAB>count` per line; `#` starts a comment line.
pub fn parse_field_names(text: &str) -> Result<Vec<(String, u64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (name, count) = match line.rsplit_once('\t') {
            Some((name, count)) => {
                let c = count.trim().parse::<u64>().map_err(|_| Error::Parse {
                    row: i + 1,
                    message: format!("bad count {count:?}"),
                })?;
                (name, c)
            }
            None => (line, 1),
        };
        out.push((name.trim().to_string(), count));
    }
    Ok(out)
}

/// The `top_n` most frequent names, merging case variants. Ties keep
/// first-seen order.
pub fn top_field_names(entries: &[(String, u64)], top_n: usize) -> Vec<String> {
    let mut totals: Vec<(String, u64)> = Vec::new();
    let mut pos: HashMap<String, usize> = HashMap::new();
    for (name, count) in entries {
        let key = name.to_lowercase();
        match pos.get(&key) {
            Some(&i) => totals[i].1 += count,
            None => {
                pos.insert(key, totals.len());
                totals.push((name.clone(), *count));
            }
        }
    }
    // stable sort keeps first-seen order among equal counts
    totals.sort_by(|a, b| b.1.cmp(&a.1));
    totals.into_iter().take(top_n).map(|(n, _)| n).collect()
}

/// `S(c, t)`: summed `p(w|t)` over the concept's distinct terms.
pub fn alignment_score(concept: &BinConcept, topic: usize, model: &TopicModel) -> f64 {
    let phrases = concept_phrases(std::slice::from_ref(concept));
    concept
        .term_tokens(&phrases)
        .iter()
        .map(|w| model.prob(topic, w))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentConfig {
    pub a_threshold: f64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            a_threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub topic: usize,
    pub concept: String,
    pub score: f64,
}

/// Maps each topic to its best-scoring concept, dropping alignments below
/// the threshold. Ties go to the lexicographically smaller concept id.
pub fn align(model: &TopicModel, concepts: &[BinConcept], cfg: &AlignmentConfig) -> Result<Vec<Alignment>> {
    if !(0.0..=1.0).contains(&cfg.a_threshold) {
        return Err(Error::InvalidConfig(format!(
            "a_threshold {} not in [0, 1]",
            cfg.a_threshold
        )));
    }
    let mut sorted: Vec<&BinConcept> = concepts.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = Vec::new();
    for topic in 0..model.topics() {
        let mut best: Option<(&BinConcept, f64)> = None;
        for c in &sorted {
            let s = alignment_score(c, topic, model);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        if let Some((c, score)) = best {
            if score >= cfg.a_threshold {
                out.push(Alignment {
                    topic,
                    concept: c.id.clone(),
                    score,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarvestParams {
    pub fold_in_iterations: usize,
    pub seed: u64,
}

impl Default for HarvestParams {
    fn default() -> Self {
        HarvestParams {
            fold_in_iterations: 50,
            seed: 0,
        }
    }
}

/// Folds each survey question into the model and files its breaks under
/// the concept aligned with its dominant topic. Returns warnings for
/// skipped questions.
pub fn harvest_breaks(
    surveys: &[SurveyQuestion],
    alignments: &[Alignment],
    model: &TopicModel,
    concepts: &mut [BinConcept],
    params: HarvestParams,
) -> Vec<String> {
    let phrases = concept_phrases(concepts);
    let by_topic: HashMap<usize, &str> = alignments
        .iter()
        .map(|a| (a.topic, a.concept.as_str()))
        .collect();
    let mut warnings = Vec::new();
    let mut gathered: HashMap<String, Vec<BinOption>> = HashMap::new();

    for (i, q) in surveys.iter().enumerate() {
        let option = BinOption {
            breaks: q.breaks.clone(),
            open_low: q.open_low,
            open_high: q.open_high,
            source_count: 1,
        };
        if option.validate().is_err() {
            warnings.push(format!("question {}: no usable numeric breaks, skipped", q.id));
            continue;
        }
        let tokens = normalize_text(&q.text, &phrases);
        let seed = params.seed.wrapping_add(i as u64 + 1);
        let Some(theta) = model.fold_in(&tokens, params.fold_in_iterations, seed) else {
            warnings.push(format!("question {}: no tokens in the model vocabulary, skipped", q.id));
            continue;
        };
        let topic = theta
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (t, &p)| if p > best.1 { (t, p) } else { best })
            .0;
        let Some(concept) = by_topic.get(&topic) else {
            continue;
        };
        let options = gathered.entry(concept.to_string()).or_default();
        match options.iter_mut().find(|o| o.key() == option.key()) {
            Some(o) => o.source_count += 1,
            None => options.push(option),
        }
    }

    for c in concepts.iter_mut() {
        if let Some(new) = gathered.remove(&c.id) {
            for option in new {
                match c.bin_options.iter_mut().find(|o| o.key() == option.key()) {
                    Some(o) => o.source_count += option.source_count,
                    None => c.bin_options.push(option),
                }
            }
        }
        c.bin_options.sort_by(|a, b| {
            b.source_count
                .cmp(&a.source_count)
                .then_with(|| a.canonical().cmp(&b.canonical()))
        });
    }
    warnings
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupProvenance {
    pub concepts_sha256: String,
    pub fields_sha256: String,
    pub surveys_sha256: String,
    pub seed: u64,
    pub topics: usize,
    pub iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    pub a_threshold: f64,
    pub top_fields: usize,
    pub alignments: Vec<Alignment>,
}

/// Concepts and their bin options; the artifact of [`build_lookup`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticLookupTable {
    pub version: String,
    pub provenance: Option<LookupProvenance>,
    pub concepts: Vec<BinConcept>,
}

impl SemanticLookupTable {
    /// A table straight from seed concepts, without provenance.
    pub fn from_concepts(concepts: Vec<BinConcept>) -> Result<SemanticLookupTable> {
        let t = SemanticLookupTable {
            version: LOOKUP_VERSION.into(),
            provenance: None,
            concepts,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for c in &self.concepts {
            c.validate()?;
            if !ids.insert(c.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate concept id {:?}", c.id)));
            }
        }
        Ok(())
    }

    pub fn concept(&self, id: &str) -> Option<&BinConcept> {
        self.concepts.iter().find(|c| c.id == id)
    }

    pub fn from_json(json: &str) -> Result<SemanticLookupTable> {
        let t: SemanticLookupTable = serde_json::from_str(json)?;
        t.validate()?;
        Ok(t)
    }

    /// Pretty JSON with a trailing newline. Field order is fixed by the
    /// struct definitions, so equal tables serialize to equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("lookup table serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    /// Defaults to the number of concepts.
    pub topics: Option<usize>,
    pub iterations: usize,
    pub seed: u64,
    pub top_fields: usize,
    pub alignment: AlignmentConfig,
    pub fold_in_iterations: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            topics: None,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            top_fields: DEFAULT_TOP_FIELDS,
            alignment: AlignmentConfig::default(),
            fold_in_iterations: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LookupBuild {
    pub table: SemanticLookupTable,
    pub model: TopicModel,
    pub alignments: Vec<Alignment>,
    pub warnings: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Inputs to the pipeline as raw file contents.
#[derive(Debug, Clone, Copy)]
pub struct LookupSources<'a> {
    pub concepts: &'a str,
    pub field_names: &'a str,
    pub surveys: &'a str,
}

/// Trains the model, aligns topics to concepts and harvests survey breaks.
pub fn build_lookup(sources: LookupSources<'_>, params: &PipelineParams) -> Result<LookupBuild> {
    let mut concepts = parse_concepts(sources.concepts)?;
    let fields = parse_field_names(sources.field_names)?;
    let surveys = parse_surveys(sources.surveys)?;
    let phrases = concept_phrases(&concepts);

    let mut documents = Vec::new();
    for (i, name) in top_field_names(&fields, params.top_fields).iter().enumerate() {
        let tokens = normalize_text(name, &phrases);
        if !tokens.is_empty() {
            documents.push(Document {
                id: format!("field:{i}"),
                tokens,
            });
        }
    }
    for q in &surveys {
        let tokens = normalize_text(&q.text, &phrases);
        if !tokens.is_empty() {
            documents.push(Document {
                id: format!("survey:{}", q.id),
                tokens,
            });
        }
    }
    let corpus = Corpus::new(documents)?;
    let topics = params.topics.unwrap_or(concepts.len()).max(1);
    let model = train_lda(&corpus, LdaParams::new(topics, params.iterations, params.seed))?;
    let alignments = align(&model, &concepts, &params.alignment)?;

    let mut warnings = Vec::new();
    if surveys.is_empty() {
        warnings.push("survey corpus is empty; concepts will have no bin options".to_string());
    }
    warnings.extend(harvest_breaks(
        &surveys,
        &alignments,
        &model,
        &mut concepts,
        HarvestParams {
            fold_in_iterations: params.fold_in_iterations,
            seed: params.seed,
        },
    ));

    let table = SemanticLookupTable {
        version: LOOKUP_VERSION.into(),
        provenance: Some(LookupProvenance {
            concepts_sha256: sha256_hex(sources.concepts.as_bytes()),
            fields_sha256: sha256_hex(sources.field_names.as_bytes()),
            surveys_sha256: sha256_hex(sources.surveys.as_bytes()),
            seed: params.seed,
            topics,
            iterations: params.iterations,
            alpha: model.params.alpha,
            beta: model.params.beta,
            a_threshold: params.alignment.a_threshold,
            top_fields: params.top_fields,
            alignments: alignments.clone(),
        }),
        concepts,
    };
    Ok(LookupBuild {
        table,
        model,
        alignments,
        warnings,
    })
}

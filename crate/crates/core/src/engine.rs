//! Orchestration shared by the CLI and the HTTP service: profile a column,
//! try semantic bins, fall back to legibility defaults, and re-check
//! user-edited schemes.

use serde::{Deserialize, Serialize};

use crate::concepts::SemanticLookupTable;
use crate::decimal::Dec;
use crate::error::{Error, Result};
use crate::ingest::{profile, SeriesProfile};
use crate::legibility::{
    check_scheme, default_bins, round_to_grain, snap_to_nice, LegibilityConfig, LegibilityReport, Purpose,
};
use crate::matching::{resolve_semantic, ConceptMatch, MatchConfig, SemanticOutcome};
use crate::scheme::{assign, BinCounts, BinScheme, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Semantic,
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRequest {
    pub field: String,
    #[serde(default)]
    pub purpose: Purpose,
    #[serde(default)]
    pub overrides: Option<LegibilityConfig>,
    #[serde(default)]
    pub forced_mode: Option<Mode>,
}

impl BinRequest {
    pub fn new(field: impl Into<String>) -> BinRequest {
        BinRequest {
            field: field.into(),
            purpose: Purpose::default(),
            overrides: None,
            forced_mode: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinResponse {
    pub field: String,
    pub mode: Mode,
    pub scheme: BinScheme,
    pub counts: BinCounts,
    /// The scheme not chosen, when one exists.
    pub alternatives: Vec<BinScheme>,
    pub profile: SeriesProfile,
    pub concept: Option<ConceptMatch>,
    pub legibility: LegibilityReport,
    /// Names of failed legibility checks.
    pub violations: Vec<String>,
    pub note: Option<String>,
}

/// A scheme with its counts, one side of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub scheme: BinScheme,
    pub counts: BinCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub field: String,
    pub semantic: Option<Panel>,
    pub default: Panel,
    pub concept: Option<ConceptMatch>,
    pub note: Option<String>,
}

/// Which legibility repairs `/refine` applies before re-checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineToggles {
    pub snap_to_grain: bool,
    pub nice: bool,
    pub anchor_zero: bool,
}

impl Default for RefineToggles {
    fn default() -> Self {
        RefineToggles {
            snap_to_grain: true,
            nice: false,
            anchor_zero: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineRequest {
    pub field: String,
    pub edges: Vec<f64>,
    #[serde(default)]
    pub open_low: bool,
    #[serde(default)]
    pub open_high: bool,
    #[serde(default)]
    pub toggles: RefineToggles,
    #[serde(default)]
    pub overrides: Option<LegibilityConfig>,
}

/// Stateless binning over one lookup table.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    pub table: Option<SemanticLookupTable>,
    pub matching: MatchConfig,
    pub legibility: LegibilityConfig,
}

struct Column {
    values: Vec<f64>,
    profile: SeriesProfile,
}

fn prepare(field: &str, column: &[Option<Dec>]) -> Result<Column> {
    let profile = profile(column).map_err(|e| match e {
        Error::EmptyColumn(_) => Error::EmptyColumn(field.to_string()),
        other => other,
    })?;
    Ok(Column {
        values: column.iter().flatten().map(Dec::to_f64).collect(),
        profile,
    })
}

fn violations(report: &LegibilityReport, check_nice: bool) -> Vec<String> {
    [
        ("grain", report.grain),
        ("nice", report.nice || !check_nice),
        ("zero", report.zero),
        ("coverage", report.coverage),
    ]
    .into_iter()
    .filter(|(_, ok)| !ok)
    .map(|(name, _)| name.to_string())
    .collect()
}

impl Engine {
    pub fn new(table: Option<SemanticLookupTable>) -> Engine {
        Engine {
            table,
            ..Engine::default()
        }
    }

    fn config<'a>(&'a self, overrides: &'a Option<LegibilityConfig>) -> Result<&'a LegibilityConfig> {
        let cfg = overrides.as_ref().unwrap_or(&self.legibility);
        cfg.validate()?;
        Ok(cfg)
    }

    fn semantic(&self, field: &str, col: &Column, max_bins: usize) -> Result<SemanticOutcome> {
        match &self.table {
            Some(table) => resolve_semantic(field, &col.profile, table, &self.matching, max_bins),
            None => Ok(SemanticOutcome::NoMatch),
        }
    }

    /// Semantic bins when the field matches, defaults otherwise, unless the
    /// request forces a mode.
    pub fn bin(&self, column: &[Option<Dec>], request: &BinRequest) -> Result<BinResponse> {
        let cfg = self.config(&request.overrides)?;
        let col = prepare(&request.field, column)?;
        let outcome = self.semantic(&request.field, &col, cfg.max_bins(request.purpose))?;
        let default = default_bins(&col.profile, &col.values, request.purpose, cfg)?;
        let semantic = outcome.scheme().cloned();

        let (mode, scheme, alternatives) = match (request.forced_mode, semantic) {
            (Some(Mode::Default), sem) | (None, sem @ None) => (Mode::Default, default, sem.into_iter().collect()),
            (_, Some(sem)) => (Mode::Semantic, sem, vec![default]),
            (Some(Mode::Semantic), None) => return Err(Error::NoSemanticMatch(request.field.clone())),
        };
        let counts = assign(&col.values, &scheme)?;
        let legibility = check_scheme(&scheme, &col.profile, cfg);
        Ok(BinResponse {
            field: request.field.clone(),
            mode,
            violations: violations(&legibility, false),
            legibility,
            counts,
            alternatives,
            profile: col.profile,
            concept: outcome.matched().cloned(),
            note: outcome.note(),
            scheme,
        })
    }

    /// Both schemes for one field; the semantic side is empty when nothing
    /// matched.
    pub fn compare(&self, field: &str, column: &[Option<Dec>], purpose: Purpose) -> Result<Comparison> {
        let col = prepare(field, column)?;
        let outcome = self.semantic(field, &col, self.legibility.max_bins(purpose))?;
        let default = default_bins(&col.profile, &col.values, purpose, &self.legibility)?;
        let panel = |scheme: BinScheme| -> Result<Panel> {
            Ok(Panel {
                counts: assign(&col.values, &scheme)?,
                scheme,
            })
        };
        Ok(Comparison {
            field: field.to_string(),
            semantic: outcome.scheme().cloned().map(panel).transpose()?,
            default: panel(default)?,
            concept: outcome.matched().cloned(),
            note: outcome.note(),
        })
    }

    /// Applies the toggled repairs to user edges, then reports which
    /// legibility checks still fail. Never rejects a valid scheme.
    pub fn refine(&self, column: &[Option<Dec>], request: &RefineRequest) -> Result<BinResponse> {
        let cfg = self.config(&request.overrides)?;
        let col = prepare(&request.field, column)?;
        let grain = col.profile.grain;
        let mut edges = request.edges.clone();
        if request.toggles.anchor_zero
            && col.profile.min < 0.0
            && col.profile.max > 0.0
            && edges.first().is_some_and(|&e| e < 0.0)
            && edges.last().is_some_and(|&e| e > 0.0)
            && !edges.contains(&0.0)
        {
            edges.push(0.0);
            edges.sort_by(f64::total_cmp);
        }
        let mut scheme = BinScheme::new(edges, request.open_low, request.open_high, Provenance::Manual, grain)?;
        if request.toggles.snap_to_grain {
            scheme = round_to_grain(&scheme, grain)?;
        }
        if request.toggles.nice {
            scheme = snap_to_nice(&scheme, grain, cfg)?;
        }
        let counts = assign(&col.values, &scheme)?;
        let legibility = check_scheme(&scheme, &col.profile, cfg);
        Ok(BinResponse {
            field: request.field.clone(),
            mode: Mode::Default,
            violations: violations(&legibility, request.toggles.nice),
            legibility,
            counts,
            alternatives: Vec::new(),
            profile: col.profile,
            concept: None,
            note: None,
            scheme,
        })
    }
}

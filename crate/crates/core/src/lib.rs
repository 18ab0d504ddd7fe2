pub mod concepts;
pub mod decimal;
pub mod engine;
pub mod error;
pub mod ingest;
pub mod lda;
pub mod matching;
pub mod legibility;
pub mod rules;
pub mod scheme;
pub mod text;

pub use decimal::Dec;
pub use error::{Error, Result};
pub use ingest::{infer_grain, parse_csv, profile, CsvOptions, SeriesProfile, Table};
pub use legibility::{default_bins, nice_step, LegibilityConfig, Purpose};
pub use scheme::{assign, label_bins, BinCounts, BinScheme, Grain, LabelFormat, Provenance};
pub use concepts::{
    build_lookup, bundled_concepts, BinConcept, BinOption, LookupSources, PipelineParams, SemanticLookupTable,
};
pub use engine::{BinRequest, BinResponse, Comparison, Engine, Mode, Panel, RefineRequest, RefineToggles};
pub use legibility::LegibilityReport;
pub use matching::{match_concept, semantic_bins, ConceptMatch, MatchConfig};

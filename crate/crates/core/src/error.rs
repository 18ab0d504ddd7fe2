use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid bin scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid grain: {0}")]
    InvalidGrain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("input is not valid UTF-8 (byte offset {0})")]
    Encoding(usize),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    #[error("column {0:?} has no non-missing values")]
    EmptyColumn(String),

    #[error("no field named {0:?}")]
    FieldNotFound(String),

    #[error("field {0:?} is not numeric")]
    NonNumeric(String),

    #[error("empty input")]
    EmptyInput,

    /// Zero spread (iqr or sd) makes a width rule unusable.
    #[error("degenerate spread: {0}")]
    DegenerateSpread(&'static str),

    #[error("{what} requires {need}, got {got}")]
    TooFew {
        what: &'static str,
        need: usize,
        got: usize,
    },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("no semantic bins available for field {0:?}")]
    NoSemanticMatch(String),

    #[error("decimal overflow while computing {0}")]
    Overflow(&'static str),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

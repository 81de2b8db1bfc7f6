use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("value {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("concept has no noun tokens")]
    NoNoun,
    #[error("malformed language code {0:?}")]
    UnknownLanguage(String),
    #[error("duplicate surface {surface:?} in language {language}")]
    Duplicate { language: String, surface: String },
    #[error("empty surface form")]
    EmptySurface,
    #[error("malformed embedding header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    DimMismatch { line: usize, expected: usize, found: usize },
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
    #[error("line {line}: non-finite or unparsable value {value:?}")]
    NonFinite { line: usize, value: String },
    #[error("header declares {declared} entries, found {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("truncated record {record}")]
    Truncated { record: usize },
    #[error("embedding table is empty")]
    EmptyTable,
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("series is constant; correlation undefined")]
    ConstantSeries,
    #[error("series lengths differ or are shorter than 2 ({left} vs {right})")]
    SeriesLength { left: usize, right: usize },
    #[error("no translation for {language}:{surface}")]
    Untranslated { language: String, surface: String },
    #[error("remote translation failed (retryable): {0}")]
    Remote(String),
    #[error("concept {0} has no in-vocabulary tokens")]
    OovConcept(String),
    #[error("co-occurrence row is all zeros")]
    ZeroRow,
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("no comparable pairs")]
    NoPairs,
    #[error("invalid number of clusters k={k} for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error("no representative words available")]
    NoRepresentatives,
    #[error("clustering has no multi-member clusters")]
    NoMultiClusters,
    #[error("missing polarity for {0}")]
    MissingPolarity(String),
    #[error("selection is empty")]
    EmptySelection,
    #[error("tokenization {0} required")]
    TokenizationMismatch(&'static str),
    #[error("inconsistent vector dimensions ({expected} vs {found})")]
    Dimension { expected: usize, found: usize },
    #[error("missing artifact {0}; run the producing stage first")]
    MissingArtifact(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IO",
            Error::Config(_) => "CONFIG",
            Error::Domain { .. } => "DOMAIN",
            Error::NoNoun => "NO_NOUN",
            Error::UnknownLanguage(_) => "UNKNOWN_LANGUAGE",
            Error::Duplicate { .. } => "DUPLICATE",
            Error::EmptySurface => "EMPTY_SURFACE",
            Error::MalformedHeader(_) => "MALFORMED_HEADER",
            Error::DimMismatch { .. } => "DIM_MISMATCH",
            Error::DuplicateToken(_) => "DUPLICATE_TOKEN",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::CountMismatch { .. } => "COUNT_MISMATCH",
            Error::Truncated { .. } => "TRUNCATED",
            Error::EmptyTable => "EMPTY_TABLE",
            Error::Row { .. } => "ROW",
            Error::ConstantSeries => "CONSTANT_SERIES",
            Error::SeriesLength { .. } => "SERIES_LENGTH",
            Error::Untranslated { .. } => "UNTRANSLATED",
            Error::Remote(_) => "REMOTE",
            Error::OovConcept(_) => "OOV_CONCEPT",
            Error::ZeroRow => "ZERO_ROW",
            Error::ZeroVector => "ZERO_VECTOR",
            Error::NoPairs => "NO_PAIRS",
            Error::InvalidK { .. } => "INVALID_K",
            Error::NoRepresentatives => "NO_REPRESENTATIVES",
            Error::NoMultiClusters => "NO_MULTI_CLUSTERS",
            Error::MissingPolarity(_) => "MISSING_POLARITY",
            Error::EmptySelection => "EMPTY_SELECTION",
            Error::TokenizationMismatch(_) => "TOKENIZATION_MISMATCH",
            Error::Dimension { .. } => "DIMENSION",
            Error::MissingArtifact(_) => "MISSING_ARTIFACT",
            Error::Json(_) => "JSON",
            Error::Csv(_) => "CSV",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::InvalidK { .. } | Error::TokenizationMismatch(_) => ErrorClass::Config,
            Error::Domain { .. }
            | Error::ConstantSeries
            | Error::SeriesLength { .. }
            | Error::ZeroRow
            | Error::ZeroVector
            | Error::NoPairs
            | Error::NoMultiClusters
            | Error::EmptySelection
            | Error::Dimension { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Remote(_))
    }
}

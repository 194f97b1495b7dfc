use thiserror::Error;

/// Errors raised anywhere in the assessment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty document")]
    EmptyDocument,
    #[error("unsyllabifiable token: {0:?}")]
    Unsyllabifiable(String),
    #[error("no words")]
    NoWords,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("empty lexicon: {0}")]
    EmptyLexicon(String),
    #[error("unknown subclass tag {tag:?} for {kind} lexicon (line {line})")]
    UnknownSubclass { kind: String, tag: String, line: usize },
    #[error("lexicon {0} carries no subclass tags")]
    UntaggedLexicon(String),
    #[error("feature {feature:?} unavailable: {reason}")]
    FeatureUnavailable { feature: String, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("single-class training data")]
    SingleClass,
    #[error("non-finite feature value at instance {instance}, feature {feature}")]
    NonFinite { instance: String, feature: String },
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("{0}")]
    Oracle(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short machine-readable code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyDocument => "empty_document",
            Error::Unsyllabifiable(_) => "unsyllabifiable",
            Error::NoWords => "no_words",
            Error::Malformed { .. } => "malformed",
            Error::EmptyLexicon(_) => "empty_lexicon",
            Error::UnknownSubclass { .. } => "unknown_subclass",
            Error::UntaggedLexicon(_) => "untagged_lexicon",
            Error::FeatureUnavailable { .. } => "feature_unavailable",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidInput(_) => "invalid_input",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingleClass => "single_class",
            Error::NonFinite { .. } => "non_finite",
            Error::Fold { .. } => "fold_failed",
            Error::CorruptModel(_) => "corrupt_model",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::Oracle(_) => "oracle_failed",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

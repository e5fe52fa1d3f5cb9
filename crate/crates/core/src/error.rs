use thiserror::Error;

use crate::scoring::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no score supplied for property `{0}`")]
    MissingScore(String),

    #[error("score {score} for `{property}` is outside [0, {max}]")]
    ScoreOutOfRange { property: String, score: f64, max: f64 },

    #[error("maximum score for `{property}` must be positive and finite, got {max}")]
    InvalidMaximum { property: String, max: f64 },

    #[error("invalid weight configuration: {0}")]
    InvalidWeights(ValidationReport),

    #[error("`{property}`: unknown option `{label}`")]
    UnknownOption { property: String, label: String },

    #[error("`{property}`: expected {expected} entries, found {found}")]
    Arity { property: String, expected: usize, found: usize },

    #[error("`{property}`: value {value} at position {index} is outside {allowed}")]
    ValueOutOfRange {
        property: String,
        index: usize,
        value: i64,
        allowed: &'static str,
    },

    #[error("`{property}`: no rater rows supplied for an assessed property")]
    EmptyRatings { property: String },

    #[error("answer sheet is missing the `{0}` block")]
    MissingBlock(String),

    #[error("{field}: {message}")]
    Invalid { field: String, message: String },

    #[error("unknown property `{0}`")]
    UnknownProperty(String),

    #[error("unknown stakeholder `{0}`")]
    UnknownStakeholder(String),

    #[error("success rate is undefined for stakeholder `{0}`: no contestation attempts")]
    UndefinedSuccessRate(String),

    #[error("thresholds must satisfy 0 < low ({low}) < high ({high}) < 1")]
    InvalidThresholds { low: f64, high: f64 },

    #[error("unsupported schema version `{found}` (expected \"{expected}\"); {hint}")]
    SchemaVersion {
        found: String,
        expected: &'static str,
        hint: String,
    },

    #[error("unsupported report format `{0}` (expected markdown, json or csv)")]
    UnsupportedFormat(String),

    #[error("assessments were scored under different weight configurations")]
    MixedConfigs,

    #[error("document `{0}` not found")]
    NotFound(String),

    #[error("injected fault after {0} bytes")]
    InjectedFault(usize),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Name of the offending input field, when one can be identified.
    pub fn field(&self) -> Option<String> {
        match self {
            Error::MissingScore(p) | Error::UnknownProperty(p) | Error::MissingBlock(p) => {
                Some(p.clone())
            }
            Error::ScoreOutOfRange { property, .. }
            | Error::InvalidMaximum { property, .. }
            | Error::UnknownOption { property, .. }
            | Error::Arity { property, .. }
            | Error::ValueOutOfRange { property, .. }
            | Error::EmptyRatings { property } => Some(property.clone()),
            Error::Invalid { field, .. } => Some(field.clone()),
            Error::UnknownStakeholder(_) | Error::UndefinedSuccessRate(_) => {
                Some("stakeholder".into())
            }
            Error::InvalidWeights(_) => Some("weights".into()),
            Error::InvalidThresholds { .. } => Some("thresholds".into()),
            Error::SchemaVersion { .. } => Some("schema_version".into()),
            _ => None,
        }
    }

    /// True for errors caused by the caller's input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::InjectedFault(_))
    }
}

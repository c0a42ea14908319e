use std::fmt;

use thiserror::Error;

use crate::issue::Issue;

/// Errors returned by the library. Validation findings are not errors; they
/// are reported as [`Issue`] lists.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("extension registry is invalid: {}", join_issues(.0))]
    RegistryInvalid(Vec<Issue>),
    #[error("unknown city object type `{0}`")]
    UnknownType(String),
    #[error("non-finite coordinate in object `{0}`")]
    NonFiniteCoordinate(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("document invariant violated: {0}")]
    InvariantViolation(String),
    #[error("document is already CityJSON {0}")]
    AlreadyCurrent(String),
    #[error("coordinate outside projection domain: {0}")]
    OutOfDomain(String),
    #[error("unknown reference system `{0}`")]
    UnknownCrs(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("degenerate height: z_low {low} must be below z_high {high}")]
    DegenerateHeight { low: f64, high: f64 },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("grid dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("location ({x}, {y}) is outside the grid extent")]
    OutsideExtent { x: f64, y: f64 },
    #[error("no triangle survived clipping to the footprint")]
    EmptyResult,
    #[error("missing required attribute `{0}`")]
    MissingAttribute(String),
    #[error("value `{value}` is not allowed for `{attribute}`")]
    InvalidEnum { attribute: String, value: String },
    #[error("target object `{0}` not found")]
    TargetNotFound(String),
    #[error("object `{id}` of type `{object_type}` cannot be targeted here")]
    TargetTypeNotAllowed { id: String, object_type: String },
    #[error("duplicate building unit id `{0}`")]
    DuplicateUnitId(String),
    #[error("recipe error: {0}")]
    Recipe(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(location: impl fmt::Display, message: impl fmt::Display) -> Self {
        Error::Parse {
            location: location.to_string(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(context: impl fmt::Display, source: std::io::Error) -> Self {
        Error::Io {
            context: context.to_string(),
            source,
        }
    }
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| format!("{} {}", i.code, i.message))
        .collect::<Vec<_>>()
        .join("; ")
}

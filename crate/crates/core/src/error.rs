use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value {what}")]
    NonFinite { what: String },

    #[error("missing value for parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("map is not ascending: {0}")]
    NotAscending(String),

    #[error("series too short: need at least {need} terms, have {have}")]
    TooShort { need: usize, have: usize },

    #[error("too few steady orders: need at least {need}, have {have}")]
    TooFewOrders { need: usize, have: usize },

    #[error("steady orders must be strictly increasing")]
    NotIncreasing,

    #[error("bracket [{lo}, {hi}] does not straddle a helix/non-helix transition")]
    BracketNotStraddling { lo: f64, hi: f64 },

    #[error("parameter {value} is not in the pseudo-helix regime ({verdict})")]
    NotInRegime { value: f64, verdict: String },

    #[error("insufficient steady points: found {found}, need {need} (raise the horizon)")]
    InsufficientSteadyPoints { found: usize, need: usize },

    #[error("target periodicity unreachable: {0}")]
    Unreachable(String),

    #[error("non-monotone bracket: {0}")]
    NonMonotone(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Ingest {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse failure classes, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Numeric,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::MissingParameter(_)
            | Error::UnknownFamily(_)
            | Error::InvalidArgument(_)
            | Error::Config(_) => ErrorClass::Usage,
            Error::Ingest { .. } | Error::Io { .. } => ErrorClass::Io,
            _ => ErrorClass::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

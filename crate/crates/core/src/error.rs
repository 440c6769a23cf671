use std::fmt;

use thiserror::Error;

use crate::frequency::SamplingModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Usage,
    /// Malformed or inconsistent input data.
    Data,
    /// The data do not support the requested estimate.
    Undefined,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode violation: {0}")]
    ModeViolation(String),

    #[error("{model} accumulator cannot produce a {requested} snapshot")]
    WrongModel {
        model: SamplingModel,
        requested: SamplingModel,
    },

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent frequency counts: {0}")]
    InvalidFrequencies(String),

    #[error("target coverage {target} already achieved (current coverage {current:.6})")]
    AlreadyAchieved { target: f64, current: f64 },

    #[error("target coverage {target} is unreachable (must be below 1)")]
    UnreachableTarget { target: f64 },

    #[error("effort estimate needs singletons and doubletons (got {singletons} and {doubletons})")]
    InsufficientRareSpecies { singletons: u64, doubletons: u64 },

    #[error(
        "target coverage {target} lies outside the range of the closed-form effort formula \
         (log argument {argument:.6}); use the exact inversion instead"
    )]
    FormulaOutOfRange { target: f64, argument: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: {message}")]
    Monotonicity { row: usize, message: String },

    #[error("undefined input rate: latest snapshot has t = {time_s} s and n = {inputs}")]
    UndefinedRate { time_s: u64, inputs: u64 },

    #[error("need at least 2 campaigns, got {runs}")]
    InsufficientReplication { runs: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn undefined(msg: impl fmt::Display) -> Self {
        Error::UndefinedEstimate(msg.to_string())
    }

    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidArgument(msg.to_string())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::ModeViolation(_)
            | Error::WrongModel { .. }
            | Error::InvalidFrequencies(_)
            | Error::Parse { .. }
            | Error::Schema(_)
            | Error::Monotonicity { .. }
            | Error::Io(_) => ErrorKind::Data,
            Error::UndefinedEstimate(_)
            | Error::AlreadyAchieved { .. }
            | Error::UnreachableTarget { .. }
            | Error::InsufficientRareSpecies { .. }
            | Error::FormulaOutOfRange { .. }
            | Error::UndefinedRate { .. }
            | Error::InsufficientReplication { .. } => ErrorKind::Undefined,
        }
    }

    /// Stable machine-readable identifier for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ModeViolation(_) => "mode_violation",
            Error::WrongModel { .. } => "wrong_model",
            Error::UndefinedEstimate(_) => "undefined_estimate",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidFrequencies(_) => "invalid_frequencies",
            Error::AlreadyAchieved { .. } => "already_achieved",
            Error::UnreachableTarget { .. } => "unreachable_target",
            Error::InsufficientRareSpecies { .. } => "insufficient_rare_species",
            Error::FormulaOutOfRange { .. } => "formula_out_of_range",
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::Monotonicity { .. } => "monotonicity",
            Error::UndefinedRate { .. } => "undefined_rate",
            Error::InsufficientReplication { .. } => "insufficient_replication",
            Error::Io(_) => "io",
        }
    }
}

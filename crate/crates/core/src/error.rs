use std::path::PathBuf;

use thiserror::Error;

/// Coarse error classes; the CLI maps each to a distinct exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum NucsError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("id set mismatch: {0}")]
    IdMismatch(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("non-finite value for id `{id}`")]
    NonFinite { id: String },

    #[error("class {class} has no samples")]
    EmptyClass { class: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed input {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("dataset has no features")]
    MissingFeatures,

    #[error("coreset budget {budget} is smaller than the class count {classes}")]
    BudgetBelowClassCount { budget: usize, classes: usize },

    #[error("budget {budget} exceeds the available pool of {pool} samples")]
    BudgetExceedsPool { budget: usize, pool: usize },

    #[error("class {class} has non-positive difficulty {value}; normalize scores first")]
    NonPositiveDifficulty { class: usize, value: f64 },

    #[error("degenerate difficulty table: {0}")]
    DegenerateTable(String),

    #[error("selection rate f0={f0} outside the feasible range [{lo}, {hi}]")]
    InfeasibleRate { f0: f64, lo: f64, hi: f64 },

    #[error("interior optimum infeasible (f0*={f0}, f1*={f1}); use the constrained allocator")]
    NotInterior { f0: f64, f1: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl NucsError {
    pub fn kind(&self) -> ErrorKind {
        use NucsError::*;
        match self {
            InvalidParameter { .. }
            | BudgetBelowClassCount { .. }
            | BudgetExceedsPool { .. }
            | InfeasibleRate { .. }
            | NotInterior { .. } => ErrorKind::Config,
            IdMismatch(_)
            | DuplicateId(_)
            | NonFinite { .. }
            | EmptyClass { .. }
            | DimensionMismatch(_)
            | Malformed { .. }
            | MissingFeatures
            | NonPositiveDifficulty { .. }
            | Io { .. }
            | Csv { .. }
            | Json(_) => ErrorKind::Data,
            DegenerateTable(_) | Numeric(_) => ErrorKind::Numeric,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        NucsError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NucsError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        NucsError::Csv {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = NucsError> = std::result::Result<T, E>;

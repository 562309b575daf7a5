//! Crate-wide error type.
//!
//! Input problems (bad files, bad arguments, violated preconditions) and
//! internal invariant violations are kept apart so the CLI can map them to
//! distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },

    #[error("line {line}: duplicate record (all fields equal to an earlier record)")]
    DuplicateRecord { line: usize },

    #[error("invalid abstraction dictionary: {reason}")]
    InvalidDictionary { reason: String },

    #[error("invalid variable catalog: {reason}")]
    InvalidCatalog { reason: String },

    #[error("line {line}: {reason}")]
    InvalidContext { line: usize, reason: String },

    #[error("duplicate game name {name:?}")]
    DuplicateGame { name: String },

    #[error("context for {game:?} has no variable set")]
    EmptyContext { game: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least 2 projects to fit a model, got {rows}")]
    TooFewRows { rows: usize },

    #[error("retained component count {requested} out of range 1..={max}")]
    BadComponentCount { requested: usize, max: usize },

    #[error("no candidate projects to rank against")]
    NoCandidates,

    #[error("biplot export needs at least 2 retained components, model has {retained}")]
    TooFewComponents { retained: usize },

    #[error("no process elements found for neighbors {neighbors:?}")]
    EmptyRecommendation { neighbors: Vec<String> },

    #[error("unknown game {name:?}")]
    UnknownGame { name: String },

    #[error("{set} is not a subset of the universe; offending keys: {keys:?}")]
    NotInUniverse { set: &'static str, keys: Vec<String> },

    #[error("the element universe is empty")]
    EmptyUniverse,

    #[error("line {line}: likert score {score} out of range 1..=5")]
    ScoreOutOfRange { line: usize, score: i64 },

    #[error("process has no elements to render")]
    EmptyProcess,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A broken internal invariant, not an input problem.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the CLI: 1 for input errors, 2 for internal ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

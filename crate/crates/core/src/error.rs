use thiserror::Error;

/// Errors raised across scenario generation, cost evaluation and path search.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("{0} is not a perfect square; grid placement needs n = side * side")]
    NotPerfectSquare(usize),

    #[error(
        "source {start} and terminal {terminal} not connected after {attempts} placement attempts"
    )]
    ConnectivityNotAchieved {
        start: usize,
        terminal: usize,
        attempts: usize,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("degenerate metric bounds [{min}, {max}]")]
    DegenerateBounds { min: f64, max: f64 },

    #[error("fuzzy input {0} outside [0, 1]")]
    InputOutOfRange(f64),

    #[error("invalid rule base: {0}")]
    InvalidRuleBase(String),

    #[error("no path from {start} to {terminal}")]
    NoPath { start: usize, terminal: usize },

    #[error("terminal {terminal} unreachable from {start}")]
    Unreachable { start: usize, terminal: usize },

    #[error("broken path: no link {from} -> {to}")]
    BrokenPath { from: usize, to: usize },

    #[error("graph has {0} nodes; brute force is limited to {max}", max = crate::oracle::BRUTE_FORCE_MAX_NODES)]
    TooManyNodes(usize),

    #[error("found cost {found} is below the optimum {optimal}")]
    BelowOptimum { found: f64, optimal: f64 },

    #[error("empty population")]
    EmptyPopulation,

    #[error("non-positive fitness {0}")]
    NonPositiveFitness(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by graph reachability rather than bad input.
    pub fn is_reachability(&self) -> bool {
        match self {
            Error::NoPath { .. } | Error::Unreachable { .. } => true,
            Error::ConnectivityNotAchieved { .. } => true,
            Error::Cell { source, .. } => source.is_reachability(),
            _ => false,
        }
    }

    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Cell { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

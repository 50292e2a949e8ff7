use thiserror::Error;

/// Errors raised by model construction, mechanism evaluation and scenario loading.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("signal tuple {tuple:?} does not conform to the signal space: {reason}")]
    NonConformingTuple { tuple: Vec<usize>, reason: String },

    #[error("probabilities sum to {sum}, expected exactly 1 (deficit {deficit})")]
    Normalization { sum: String, deficit: String },

    #[error("observer index {index} out of range for {n} observers")]
    ObserverOutOfRange { index: usize, n: usize },

    #[error("conditioning on signal {signal} of observer {observer}, which has zero probability")]
    ZeroProbabilityCondition { observer: usize, signal: usize },

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("source is not identifiable: {0}")]
    NonIdentifiable(String),

    #[error("invalid report: {0}")]
    InvalidReport(String),

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("command `{command}` is not available for {kind} scenarios")]
    CommandMismatch { command: String, kind: String },
}

pub type Result<T> = std::result::Result<T, Error>;

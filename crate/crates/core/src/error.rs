use thiserror::Error;

/// Crate-wide error type. Every fallible public operation returns one of
/// these; panics are reserved for internal invariant violations.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested degree lies outside the configured bounds.
    #[error("degree out of range: {0}")]
    DegreeOutOfRange(String),

    /// A rational number failed the odd-denominator (2-locality) check.
    #[error("even denominator: {0}")]
    EvenDenominator(String),

    /// An operation that must produce integral output produced a fraction.
    #[error("non-integral result: {0}")]
    NonIntegral(String),

    /// Mixed or inconsistent gradings in a single element.
    #[error("grading violation: {0}")]
    Grading(String),

    /// A block exceeded the configured row budget. The message reports the
    /// offending block and its size so the caller can raise the budget.
    #[error("block budget exceeded: {0}")]
    Budget(String),

    /// A linear solve had no solution.
    #[error("no solution: {0}")]
    Solve(String),

    /// A Massey product's defining system does not exist.
    #[error("Massey product not defined: {0}")]
    MasseyUndefined(String),

    /// A localized statement was requested outside the certified region.
    #[error("localization not certified: {0}")]
    NotCertified(String),

    /// Chart emission failed: malformed TSV, missing blocks, bad labels.
    #[error("chart: {0}")]
    Chart(String),

    /// Cache file missing, corrupted, or incompatible.
    #[error("cache: {0}")]
    Cache(String),

    /// Malformed run configuration.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by game construction, oracles, samplers and estimators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Player count does not fit in the coalition bitmask representation.
    #[error("player count {n} exceeds the {max}-player bitmask limit")]
    TooManyPlayers { n: usize, max: usize },

    /// A coalition mask has bits set outside the player universe.
    #[error("coalition mask {mask:#b} has bits outside the {n}-player universe")]
    MaskOutOfRange { mask: u64, n: usize },

    /// A player identifier is outside `1..=n`.
    #[error("player {player} is outside the valid range 1..={n}")]
    PlayerOutOfRange { player: usize, n: usize },

    /// Exhaustive power-set enumeration refused without an explicit override.
    #[error("refusing exhaustive enumeration of {count} subsets for n = {n}; use the forced variant if this is intended")]
    EnumerationGuard { n: usize, count: u128 },

    /// Exact (brute-force) oracle refused without an explicit override.
    #[error("exact oracle on n = {n} players needs 2^{n} game evaluations; limit is n <= {limit} unless forced")]
    ExactOracleGuard { n: usize, limit: usize },

    /// An interaction order is outside `1..=n`.
    #[error("interaction order {order} is outside the valid range 1..={n}")]
    OrderOutOfRange { order: usize, n: usize },

    /// A size filter is inconsistent (e.g. min > max or max > n).
    #[error("invalid subset size range {min}..={max} for n = {n}")]
    InvalidSizeRange { min: usize, max: usize, n: usize },

    /// Table lookup beyond the precomputed range.
    #[error("index {index} is beyond the precomputed table size {size}")]
    TableOutOfRange { index: usize, size: usize },

    /// A game value or weight that must be finite is NaN or infinite.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// Stored game data whose length disagrees with the declared player count.
    #[error("lookup table has {got} values but n = {n} requires {expected}")]
    LookupLengthMismatch { n: usize, got: usize, expected: usize },

    /// Unsatisfiable unanimity-game generation parameters.
    #[error("cannot generate SOUM: {reason}")]
    SoumInfeasible { reason: String },

    /// Sampling weights that are unusable (negative, non-finite or all zero).
    #[error("invalid sampling weights: {reason}")]
    InvalidSamplingWeights { reason: String },

    /// Evaluation budget too small for the mandatory coalitions.
    #[error("budget {budget} is too small: {reason}")]
    BudgetTooSmall { budget: u64, reason: String },

    /// Estimator configuration that fails validation.
    #[error("invalid estimator configuration: {reason}")]
    InvalidConfig { reason: String },

    /// Two interaction-value collections whose key sets disagree.
    #[error("interaction key mismatch at order {order}: {reason}")]
    KeyMismatch { order: usize, reason: String },

    /// A weighted least-squares system that cannot be solved.
    #[error("weighted least-squares solve failed: {reason}")]
    SolveFailed { reason: String },

    /// Malformed serialized artifact (game file, batch file, ...).
    #[error("invalid {what}: {reason}")]
    InvalidArtifact { what: &'static str, reason: String },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Underlying JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

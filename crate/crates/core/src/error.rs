use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate rank {rank} at index {index}")]
    DuplicateRank { index: usize, rank: i64 },

    #[error("rank {rank} at index {index} is outside 1..={len}")]
    RankOutOfRange { index: usize, rank: i64, len: usize },

    #[error("position {position} is outside 1..={len}")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("positions must be strictly increasing (index {index})")]
    PositionsNotIncreasing { index: usize },

    #[error("duplicate entry at index {index}")]
    DuplicateEntry { index: usize },

    #[error("overlap size {overlap} is outside 1..={max} for pattern length {k}")]
    OverlapOutOfRange { k: usize, overlap: usize, max: usize },

    #[error("overlap scheme is built for length {scheme} but the pattern has length {pattern}")]
    ArityMismatch { scheme: usize, pattern: usize },

    #[error("pattern length {k} exceeds the cap of {cap}")]
    PatternTooLong { k: usize, cap: usize },

    #[error("n = {n} exceeds the brute-force guard n <= {cap}")]
    BruteForceTooLarge { n: usize, cap: usize },

    #[error("standard deviation is zero; the count is deterministic")]
    ZeroSigma,

    #[error("standard deviation must be positive, got {0}")]
    NonPositiveSd(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("identity check failed: {0}")]
    IdentityViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

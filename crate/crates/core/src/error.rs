use thiserror::Error;

/// Errors raised by every layer of the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable tables differ")]
    TableMismatch,
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("monomial {0:?} lies outside the truncation profile")]
    OutsideProfile(Vec<u32>),
    #[error("series has zero constant term and is not a unit")]
    NotAUnit,
    #[error("substituted series for `{0}` has a nonzero constant term")]
    NonNilpotentSubstitution(String),
    #[error("series is not nilpotent under its profile: {0}")]
    NotNilpotent(String),
    #[error("truncation order must be at least 2, got {0}")]
    OrderTooSmall(u32),
    #[error("formal inverse failed verification: {0}")]
    InverseVerification(String),
    #[error("target table already contains `{0}`")]
    TableCollision(String),
    #[error("chern class index {index} out of range for rank {rank}")]
    ChernIndex { index: usize, rank: usize },
    #[error("malformed tower: {0}")]
    MalformedTower(String),
    #[error("unsupported integration: {0}")]
    UnsupportedIntegration(String),
    #[error("insufficient truncation: {0}")]
    InsufficientTruncation(String),
    #[error("truncation ceiling exceeded: cap {needed} needed, ceiling is {ceiling}")]
    TruncationCeiling { needed: u32, ceiling: u32 },
    #[error("moving bundle has a zero character")]
    ZeroCharacter,
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("basis conversion failed: {0}")]
    BasisConversion(String),
    #[error("theory mismatch: {0}")]
    TheoryMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
}

impl Error {
    /// True for the errors that more truncation headroom could fix.
    pub fn is_truncation(&self) -> bool {
        matches!(
            self,
            Error::InsufficientTruncation(_) | Error::TruncationCeiling { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

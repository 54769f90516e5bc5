use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("log density at the current state is not finite ({0}); the chain was initialised at a zero-mass state")]
    NonFiniteCurrent(f64),
    #[error("invalid temperature ladder: {0}")]
    InvalidLadder(String),
    #[error("sampler needs at least {min} chains, got {got}")]
    TooFewChains { min: usize, got: usize },
    #[error("expected {expected} per-chain entries, got {got}")]
    ChainCountMismatch { expected: usize, got: usize },
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("trace has {len} entries, at least {min} required")]
    TraceTooShort { len: usize, min: usize },
    #[error("trace entries have inconsistent dimensions ({expected} vs {got})")]
    RaggedTrace { expected: usize, got: usize },
    #[error("invalid histogram range: need lo < hi and at least one bin")]
    InvalidHistogram,
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("enumeration over {p} binary coordinates exceeds the limit of {max}")]
    EnumerationTooLarge { p: usize, max: usize },
    #[error("leaf is improper: {uncensored} uncensored observations, need at least 2 with distinct times")]
    ImproperLeaf { uncensored: usize },
    #[error("mode search for the leaf shape parameter did not converge: {0}")]
    ModeNotFound(String),
    #[error("no within-chain tree move is applicable")]
    NoApplicableMove,
    #[error("{0}")]
    Ingest(#[from] crate::cart::IngestError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

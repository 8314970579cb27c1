use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported alphabet: {0}")]
    UnsupportedCardinality(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("signal set too large: {size} exceeds cap {cap}")]
    SetTooLarge { size: u128, cap: u128 },
    #[error("bit string has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vector is not a member of the signal set")]
    NotInSet,
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("pairwise error probability requested for identical vectors")]
    DegeneratePair,
    #[error("ED search needs {0:e} pair evaluations, above the cap")]
    SearchTooLarge(f64),
    #[error("phase compensation requires a tone alphabet")]
    NonToneAlphabet,
    #[error("bad generator matrix: {0}")]
    BadGenerator(String),
    #[error("input length {0} is not a multiple of the encoder input width")]
    LengthError(usize),
    #[error("slope fit needs at least 3 usable points, found {0}")]
    InsufficientPoints(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the discrete calculus and its file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QhaError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("tau must lie in [0, 1], got {0}")]
    TauOutOfRange(f64),

    #[error("tau tag mismatch: expected {expected}, found {found}")]
    TauMismatch { expected: f64, found: f64 },

    #[error("point (x = {x}, omega = {omega}) is not on the phase-space lattice")]
    OffLattice { x: f64, omega: f64 },

    #[error("window has zero norm")]
    ZeroWindow,

    #[error("window must have unit L2 norm, got {0}")]
    WindowNotNormalized(f64),

    #[error("rank {rank} exceeds grid size {n}")]
    RankTooLarge { rank: usize, n: usize },

    #[error("guardrail: {0}")]
    Guardrail(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("half lattice unavailable: {0}")]
    HalfLatticeUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for QhaError {
    fn from(err: std::io::Error) -> Self {
        QhaError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QhaError>;

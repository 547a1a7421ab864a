use thiserror::Error;

/// Errors raised by the library. Variants map onto the CLI exit codes
/// (see [`Error::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("elements belong to different root data")]
    MixedData,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("inconclusive at p-adic precision {precision}: {reason}")]
    Inconclusive { precision: u32, reason: String },
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("budget exceeded: {what} (explored {explored} before stopping)")]
    Budget { what: String, explored: usize },
    #[error("not a p-divisible group window: {0}")]
    NotPDivisible(String),
    #[error("Witt vectors over different coefficient rings")]
    RingMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// 1 = validation, 2 = internal consistency, 3 = budget exhaustion.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Consistency(_) => 2,
            Error::Budget { .. } | Error::Inconclusive { .. } => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

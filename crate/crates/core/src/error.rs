use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports. Indices carried by variants are
/// 0-based; `Display` prints them 1-based to match file conventions.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by a value that is zero under the active zero policy")]
    DivisionByZero,
    #[error("the exact zero policy requires the exact backend")]
    PolicyMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("truncation degree mismatch: {0} vs {1}")]
    TruncationMismatch(u32, u32),
    #[error("matrix is singular under the active zero policy")]
    SingularMatrix,
    #[error("multi-index {0:?} is simultaneously resonant for every coordinate")]
    SimultaneouslyResonant(Vec<u32>),
    #[error("no admissible multi-index with 2 <= |Q| <= {0}")]
    NoAdmissibleIndex(u32),
    #[error("not in Jordan form: {0}")]
    NotJordanForm(String),
    #[error("germs {} and {} do not commute (first difference at degree {degree})", .p + 1, .q + 1)]
    NotCommuting { p: usize, q: usize, degree: u32 },
    #[error("matrix {} is not diagonalizable within tolerance", .0 + 1)]
    NotDiagonalizable(usize),
    #[error("min |lambda| = {0} exceeds 1; replace the germs by their inverses and retry")]
    ThetaOutOfRange(f64),
    #[error("germ {} is not normalized: coefficient norm {norm} at {index:?} exceeds 1", .germ + 1)]
    NotNormalized { germ: usize, index: Vec<u32>, norm: f64 },
    #[error("omega sequence is not non-increasing and positive at position {0}")]
    NonMonotoneOmega(usize),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }
}

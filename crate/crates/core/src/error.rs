use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("pole at z = {z}")]
    PoleAtPoint { z: Complex64 },
    #[error("numerical rank of alpha_{index} is ambiguous (residual {residual:e} in the resampling band)")]
    RankAmbiguous { index: usize, residual: f64 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("array is not in echelon form: {0}")]
    NotEchelon(String),
    #[error("F0 alternation violated in column {column}, row {row}")]
    AlternationViolation { column: usize, row: usize },
    #[error("invalid flow parameter t = {0}")]
    InvalidParameter(f64),
    #[error("matrix is not unitary (|QQ* - I| = {0:e})")]
    NotUnitary(f64),
    #[error("singular matrix")]
    Singular,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the arrangement, matrix and scattering routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {mode} out of range 1..={modes}")]
    InvalidMode { mode: usize, modes: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is {actual}x{actual}, expected {expected}x{expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{op}: size {size} exceeds the supported maximum {max}")]
    TooLarge {
        op: &'static str,
        size: usize,
        max: usize,
    },

    #[error("particle number mismatch: input has {input}, output has {output}")]
    ParticleMismatch { input: usize, output: usize },

    #[error("mode count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },

    #[error("fermionic input must have at most one particle per mode")]
    InvalidFermionState,

    #[error("period {period} does not divide {modes}")]
    PeriodDoesNotDivide { period: usize, modes: usize },

    #[error("an arrangement needs at least one mode")]
    NoModes,

    #[error("malformed arrangement {0:?}")]
    Parse(String),

    #[error("law predicts suppression of {input} -> {output} but P = {probability:e}")]
    LawViolation {
        input: String,
        output: String,
        probability: f64,
    },

    #[error("matrix file: {0}")]
    MatrixFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

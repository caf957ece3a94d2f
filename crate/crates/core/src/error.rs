use thiserror::Error;

use crate::formats::NumberFormat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid number format: {0}")]
    Format(String),

    #[error("value {value} is not representable as {format}")]
    OutOfRange { value: i64, format: NumberFormat },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("row {0} read before it was written")]
    UninitializedRow(usize),

    #[error("invalid control word: {0}")]
    ControlWord(String),

    #[error("accumulator overflow: {0}")]
    Overflow(String),

    #[error("threshold {threshold} for row {row} outside [0, {max}]")]
    Threshold {
        row: usize,
        threshold: i64,
        max: i64,
    },

    #[error("invalid mode: {0}")]
    Mode(String),

    #[error("no matrix loaded")]
    NoMatrix,

    #[error("reg_N not prepared for the loaded matrix and vector format")]
    RegNotPrepared,

    #[error("invalid PLA program: {0}")]
    Pla(String),

    #[error("inconsistent complement assignment at variable {0}")]
    ComplementMismatch(usize),

    #[error("performance model: {0}")]
    Perf(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Stable machine-readable code, used by the service and the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "E_GEOMETRY",
            Error::Format(_) | Error::OutOfRange { .. } => "E_FORMAT",
            Error::LengthMismatch { .. } | Error::IndexOutOfRange { .. } => "E_SHAPE",
            Error::UninitializedRow(_) => "E_UNINIT",
            Error::ControlWord(_) => "E_CONTROL",
            Error::Overflow(_) => "E_OVERFLOW",
            Error::Threshold { .. } => "E_THRESHOLD",
            Error::Mode(_) => "E_MODE",
            Error::NoMatrix | Error::RegNotPrepared => "E_STATE",
            Error::Pla(_) | Error::ComplementMismatch(_) => "E_PLA",
            Error::Perf(_) => "E_PERF",
            Error::Parse { .. } => "E_PARSE",
            Error::Usage(_) => "E_USAGE",
        }
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Param {
        field: &'static str,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("word {word} out of range, table holds {len} entries")]
    WordOutOfRange { word: usize, len: usize },

    #[error("bit values must be 0 or 1, found {0}")]
    InvalidBit(u8),

    #[error("active symbol modulus {0} matches no amplitude level")]
    UnknownLevel(f64),

    #[error("R1 = {r1} is not below the smallest amplitude level A1 = {a1}; the detection margin is lost")]
    MarginViolation { r1: f64, a1: f64 },

    #[error("signal has zero power")]
    ZeroSignal,

    #[error("empty input")]
    Empty,
}

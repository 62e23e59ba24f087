use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight is undefined for the zero vector")]
    ZeroVector,
    #[error("non-finite coordinate at point {point}, entry {entry}")]
    NonFinite { point: usize, entry: usize },
    #[error("point {point} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        point: usize,
        expected: usize,
        got: usize,
    },
    #[error("direction {direction} out of range for dimension {d}")]
    DirectionOutOfRange { direction: usize, d: usize },
    #[error("direction {direction} has more than one matching")]
    DuplicateDirection { direction: usize },
    #[error("index {index} in direction {direction} out of range for {n} points")]
    IndexOutOfRange {
        direction: usize,
        index: usize,
        n: usize,
    },
    #[error("tuple in direction {direction} has {got} indices, expected q = {expected}")]
    TupleSize {
        direction: usize,
        expected: usize,
        got: usize,
    },
    #[error("tuple indices must be distinct (direction {direction})")]
    RepeatedIndex { direction: usize },
    #[error("matching not disjoint in direction {direction}: index {index} used twice")]
    NotDisjoint { direction: usize, index: usize },
    #[error("operation requires q = {expected}, code has q = {got}")]
    UnsupportedQueryCount { expected: usize, got: usize },
    #[error("matched pair ({a}, {b}) in direction {direction} has coincident points")]
    DegeneratePair { direction: usize, a: usize, b: usize },
    #[error("code has no matched tuples")]
    EmptyCode,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no tiling supplied for level {level}")]
    MissingTiling { level: i64 },
    #[error("subset covers no direction; witness is empty")]
    EmptyWitness,
    #[error("singular value decomposition did not converge")]
    SvdNonConvergence,
    #[error("q = 1 has no q/(q-1) bound; use the one-query check instead")]
    OneQueryRedirect,
}

use alloc::string::String;

/// Errors reported by the library. Row, column and position fields carry
/// 1-based indices so messages can be shown to users unchanged.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: i64 },
    #[error("row {row} sums to {sum}, expected {expected}")]
    RowSumMismatch { row: usize, sum: i64, expected: i64 },
    #[error("column {col} sums to {sum}, expected {expected}")]
    ColumnSumMismatch { col: usize, sum: i64, expected: i64 },
    #[error("move {0} is not valid at this table")]
    InvalidMove(String),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("size limit exceeded: more than {cap} elements")]
    SizeLimitExceeded { cap: usize },
    #[error("variable {var} cannot be bounded; the fiber may be infinite")]
    UnboundedFiber { var: usize },
    #[error("edge {from} -> {to} has zero weight difference")]
    ZeroWeightEdge { from: usize, to: usize },
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("vertices {0} and {1} are adjacent")]
    AdjacentPair(usize, usize),
    #[error("vertices {0} and {1} coincide")]
    SameVertex(usize, usize),
    #[error("vertices {u} and {v} are not at distance two")]
    NotDistanceTwo { u: usize, v: usize },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("table is not a member of this fiber")]
    NotInFiber,
    #[error("no perfect matching exists")]
    NoPerfectMatching,
    #[error("constraints are infeasible: {0}")]
    ConstraintInfeasible(String),
    #[error("margins are not all equal: {0}")]
    MarginMismatch(String),
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;

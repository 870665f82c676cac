use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field order must be at least 2, got {0}")]
    InvalidOrder(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {q} exceeds the configured bound {bound}")]
    TooLarge { q: u64, bound: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("loop edge at vertex {0}")]
    LoopEdge(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex {0} lists {1} as a neighbor but not conversely")]
    AsymmetricAdjacency(usize, usize),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("malformed graph6 input: {0}")]
    MalformedGraph6(String),
    #[error("intersection parity law violated by subspaces {0} and {1}")]
    ParityViolation(usize, usize),
    #[error("no second-family subspace adjacent to the base subspace")]
    NoAdjacentMate,
    #[error("characteristic polynomial has non-integral roots; unfactored part {0}")]
    NonIntegralEigenvalue(String),
    #[error("eigenvalue {theta} has non-integral multiplicity {value}")]
    NonIntegralMultiplicity { theta: i64, value: String },
    #[error("graph on {n} vertices exceeds the bound {bound}")]
    GraphTooLarge { n: usize, bound: usize },
    #[error("invalid intersection array: {0}")]
    InvalidArray(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by graph construction, analysis and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("edge ({u}, {v}) has non-positive length")]
    NonPositiveLength { u: usize, v: usize },

    #[error("graph is disconnected: d({u}, {v}) is infinite")]
    Disconnected { u: usize, v: usize },

    #[error("s and t must be distinct vertices (both are {0})")]
    DegenerateEndpoints(usize),

    #[error("degenerate substitution: {0}")]
    DegenerateSubstitution(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("map is not injective: vertices {u} and {v} share an image")]
    DuplicatePoints { u: usize, v: usize },

    #[error("map contracts the pair ({u}, {v}) by a factor {ratio}")]
    Contracting { u: usize, v: usize, ratio: f64 },

    #[error("graph is not regular: vertex {vertex} has degree {degree}, expected {expected}")]
    NotRegular { vertex: usize, degree: usize, expected: usize },

    #[error("edge ({u}, {v}) does not have unit length")]
    NonUnitLength { u: usize, v: usize },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("problem size {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("not a metric: {0}")]
    NotMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

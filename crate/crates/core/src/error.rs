use thiserror::Error;

/// Problems with a single edge record.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("malformed record {0:?}")]
    Malformed(String),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {kind}")]
    Line { line: usize, kind: LineError },
    #[error("edge #{index}: {kind}")]
    Edge { index: usize, kind: LineError },
    #[error("missing \"n m\" header")]
    MissingHeader,
    #[error("header declares {declared} edges but {found} were read")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("invalid JSON at line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("not a permutation of the vertex set")]
    InvalidPermutation,
    #[error("read failed: {0}")]
    Io(String),
}

/// Errors from the enumeration engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("graph has {n} vertices, above the enumeration cap of {cap}; use the Glauber sampler instead")]
    TooLarge { n: usize, cap: usize },
    #[error("vertex {vertex} out of range for n = {n}")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("invalid fugacity: {0}")]
    InvalidFugacity(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("argument {0} is below -1/e, outside the domain of W")]
    LambertDomain(f64),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("vertex {vertex} out of range for n = {n}")]
    InvalidVertex { vertex: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FractionalError {
    #[error("graph has {n} vertices, above the cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("LP has {columns} columns, above the cap of {cap}")]
    TooManyColumns { columns: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("certificate is not verified exhaustively for this graph")]
    Unverified,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("no valid graph found within {0} attempts")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

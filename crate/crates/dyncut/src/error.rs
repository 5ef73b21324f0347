use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop ({0}, {0}) rejected")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(usize, usize),
    #[error("vertex set must be nonempty")]
    EmptySet,
    #[error("vertex set is not a proper subset")]
    NotProper,
    #[error("sets overlap")]
    Overlap,
    #[error("partition does not cover the vertex universe exactly once")]
    BadPartition,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph needs at least two vertices")]
    TooSmall,
    #[error("oracle limit exceeded: {size} vertices > {limit}")]
    OracleLimit { size: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("cluster {0} is frozen")]
    Frozen(usize),
    #[error("cluster {0} still holds a cut below lambda_min")]
    StillSmall(usize),
    #[error("vertex {vertex} is not a referrer of cut {cut}")]
    NotReferrer { cut: usize, vertex: usize },
    #[error("no value to extract a cut for")]
    NoValue,
    #[error("deleting an edge instance that was never inserted: ({0}, {1})")]
    UnknownInstance(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised when building graphs, parameters or simulations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("node index {index} out of range 1..={n}")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("graph is not connected")]
    Disconnected,
    #[error("worst-case graph requires n >= 3 and 1 <= r <= n-1 (got n={n}, r={r})")]
    InvalidWorstCase { n: usize, r: usize },
    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),
    #[error("initial state has {got} entries, graph has {expected} nodes")]
    StateLength { expected: usize, got: usize },
    #[error("initial state entry {0} is not finite")]
    NonFiniteState(usize),
    #[error("horizon must be positive and finite (got {0})")]
    InvalidHorizon(f64),
    #[error("time {t} outside trajectory range [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("invalid oracle discretization: pieces={pieces}, grid={grid}")]
    InvalidDiscretization { pieces: usize, grid: usize },
    #[error("epsilon must lie in (0, 5) (got {0})")]
    InvalidEpsilon(f64),
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("could not generate a connected graph after {0} attempts")]
    GenerationFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by graph construction, spectral checks, samplers and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {vertex} has no incident edge")]
    IsolatedVertex { vertex: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("no odd loop system exists: graph is bipartite")]
    Bipartite,

    #[error("detailed balance violated at ({x}, {y}): deviation {deviation:e}")]
    DetailedBalance { x: usize, y: usize, deviation: f64 },

    #[error("invalid path system: {0}")]
    InvalidPathSystem(String),

    #[error("bracket sign check failed for M = {m}, j = {j}: F({lo}) = {f_lo:e}, F({hi}) = {f_hi:e}")]
    BracketSign {
        m: usize,
        j: usize,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("quadrature did not converge: last estimate {estimate}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("bridge weights underflowed at loop length {k}, step {step}")]
    BridgeUnderflow { k: usize, step: usize },

    #[error("truncation tail too large: tail/mass = {ratio:e} exceeds {limit:e}; increase K")]
    TruncationTail { ratio: f64, limit: f64 },

    /// A request exceeds one of the documented desk-scale limits.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

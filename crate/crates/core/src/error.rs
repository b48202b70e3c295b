use thiserror::Error;

/// Errors raised by the algebra, the models and the verifiers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed predicate: {0}")]
    MalformedPredicate(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("renaming is not injective on the free variables: x{0} and x{1} both map to x{2}")]
    NonInjectiveMapping(usize, usize, usize),

    #[error("operation requires a bounded domain or an enumeration bound")]
    UnboundedDomain,

    #[error("external solver unavailable: {0}")]
    SolverUnavailable(String),

    #[error("external solver timed out after {0} ms")]
    SolverTimeout(u64),

    #[error("external solver protocol error: {0}")]
    SolverProtocol(String),

    #[error("explosion guard tripped: {what} exceeded the cap of {cap}")]
    ExplosionGuard { what: &'static str, cap: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

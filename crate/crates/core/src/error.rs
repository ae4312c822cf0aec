use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("malformed embedding: {0}")]
    MalformedEmbedding(String),

    #[error("malformed code: {0}")]
    MalformedCode(String),

    #[error("malformed expression: {0}")]
    MalformedExpr(String),

    #[error("malformed structure: {0}")]
    MalformedStructure(String),

    #[error("invalid json: {0}")]
    Json(String),

    /// An operation was called outside its domain (branching exceeds width,
    /// signature mismatch, unbalanced tagged structure, ...).
    #[error("{0}")]
    Precondition(String),

    /// A search or construction would exceed its configured budget.
    #[error("{what} budget exceeded: {count} > {limit}")]
    Budget {
        what: &'static str,
        count: u128,
        limit: u128,
    },
}

impl Error {
    /// True for budget errors, which callers usually report differently from
    /// domain errors.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }

    pub(crate) fn budget(what: &'static str, count: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::Budget {
            what,
            count: count.into(),
            limit: limit.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

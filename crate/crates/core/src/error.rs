use thiserror::Error;

use crate::scheme::WdrdWitness;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("connection set contains the identity element, which would create a loop")]
    IdentityInConnectionSet,

    #[error("vertex {to} is unreachable from vertex {from}")]
    Unreachable { from: usize, to: usize },

    #[error("digraph is not weakly distance-regular: {0}")]
    NotWeaklyDistanceRegular(Box<WdrdWitness>),

    #[error("precondition violated: {0}")]
    Contract(String),

    #[error("path budget of {budget} exceeded while checking arc ({u}, {v})")]
    BudgetExceeded { budget: u64, u: usize, v: usize },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("invalid family parameters: {}", .0.join("; "))]
    InvalidFamily(Vec<String>),

    #[error("unsupported family {0}: closed-form distances exist only for families iv to x")]
    UnsupportedFamily(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn parse(column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            column,
            message: message.into(),
        }
    }
}

use thiserror::Error;

use crate::array::Shape;

pub type Result<T, E = ArrayError> = std::result::Result<T, E>;

/// Failures raised by array construction, indexing, arithmetic and dispatch.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArrayError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("operands could not be broadcast together with shapes {left} and {right}")]
    Broadcast { left: Shape, right: Shape },

    #[error("index error: {0}")]
    Index(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("array is read-only")]
    ReadOnly,

    #[error("reduction error: {0}")]
    Reduction(String),

    #[error("allocation of {0} failed")]
    Alloc(String),

    #[error("function `{func}` is not implemented by backend `{backend}`")]
    NotImplemented { func: String, backend: String },

    #[error("initialization error: {0}")]
    Init(String),
}

impl ArrayError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        ArrayError::Shape(msg.into())
    }

    pub(crate) fn index(msg: impl Into<String>) -> Self {
        ArrayError::Index(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        ArrayError::Argument(msg.into())
    }

    pub(crate) fn type_err(msg: impl Into<String>) -> Self {
        ArrayError::Type(msg.into())
    }
}
